//! Gradients of a small variational circuit three ways: parameter shift,
//! adjoint vector-Jacobian product and central finite differences.

use qcae::ansatz::{init_params, prepare, run_circuit, CircuitInput, Preprocess};
use qcae::experiment::cq1_decoder;
use qcae::qgrad::{fd_jacobian, input_grad_spec, shift_grad_spec, vjp};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qcae::Result<()> {
    let mut spec = cq1_decoder();
    spec.preprocess = Preprocess::None;
    let params = init_params(&spec, &mut ChaCha8Rng::seed_from_u64(3));
    let y = vec![0.4, -0.9];
    let input = CircuitInput::Features(y.clone());

    let shift = shift_grad_spec(&spec, &params, &input)?;
    let fd = fd_jacobian(|p| run_circuit(&spec, p, &input).unwrap(), &params, 1e-5)?;
    println!("outputs {:?}", run_circuit(&spec, &params, &input)?);
    println!("d output / d params: {} x {}", shift.rows, shift.cols);
    println!("  max |shift - fd| = {:.2e}", shift.max_abs_diff(&fd));

    let dy = input_grad_spec(&spec, &params, &y)?;
    for c in 0..dy.cols {
        println!("d outputs / d y{c}: {:?}", dy.column(c));
    }

    // backprop through the circuit with an upstream gradient on its outputs
    let upstream = vec![1.0, -1.0, 0.5, 0.0];
    let (circuit, features) = prepare(&spec, &input)?;
    let adj = vjp(&circuit, &params, &features, &upstream)?;
    let expected = shift.vjp(&upstream);
    let gap = adj.params.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("adjoint vs shift VJP: max gap {gap:.2e}");
    Ok(())
}
