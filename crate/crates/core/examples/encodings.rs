//! The circuit builders behind the zoo: parameter counts, layouts and
//! outputs for one input each.

use qcae::ansatz::{init_params, param_layout, run_circuit, CircuitInput, CircuitSpec};
use qcae::experiment::{cq1_decoder, cq1_rayleigh_decoder, cq2_decoder, qc1_16qam_encoder, qc1_encoder, qc2_encoder};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn show(name: &str, spec: &CircuitSpec) -> qcae::Result<()> {
    let params = init_params(spec, &mut ChaCha8Rng::seed_from_u64(1));
    let input = if spec.takes_symbol() {
        CircuitInput::Symbol(1)
    } else {
        CircuitInput::Features(vec![0.3; spec.input_dim()])
    };
    let out = run_circuit(spec, &params, &input)?;
    let layout = param_layout(spec);
    println!("{name:<14} {} qubits, {:>3} params, {:?} encoding -> {} outputs", spec.num_qubits, layout.len(), spec.encoding.kind, out.len());
    println!("{:<14} first output {:+.4}", "", out[0]);
    Ok(())
}

fn main() -> qcae::Result<()> {
    show("qc1 tx", &qc1_encoder())?;
    show("qc2 tx", &qc2_encoder())?;
    show("cq1 rx", &cq1_decoder())?;
    show("cq2 rx", &cq2_decoder())?;
    show("qc1_16qam tx", &qc1_16qam_encoder())?;
    show("cq1_rayleigh", &cq1_rayleigh_decoder())?;
    println!("\nspecs are plain serde data, e.g. cq1 rx:\n{}", serde_json::to_string_pretty(&cq1_decoder())?);
    Ok(())
}
