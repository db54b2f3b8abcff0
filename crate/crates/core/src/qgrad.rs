//! Gradients of circuit outputs.
//!
//! The reference path is the two-term parameter-shift rule applied to every
//! gate occurrence, `df/da = [f(a + pi/2) - f(a - pi/2)] / 2`, which is exact
//! for rotations generated by Pauli words. Occurrence derivatives are then
//! chained through the affine angle expressions onto parameters and input
//! features, summing over every occurrence of a shared weight.
//!
//! [`vjp`] is an adjoint-mode fast path used in training. It computes the
//! same quantities for one upstream vector in a single backward sweep.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ansatz::{self, Circuit, CircuitInput, CircuitSpec, Head};
use crate::error::{Error, Result};
use crate::qstate::StateVector;

/// Dense row-major Jacobian, `rows` outputs by `cols` inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Jacobian {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Jacobian {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Jacobian { rows, cols, data: vec![0.0; rows * cols] }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    fn add(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.cols + col] += v;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// `upstream^T J`.
    pub fn vjp(&self, upstream: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (r, &g) in upstream.iter().enumerate().take(self.rows) {
            for (o, v) in out.iter_mut().zip(self.row(r)) {
                *o += g * v;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Jacobian) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Central finite differences `(f(x + h e_j) - f(x - h e_j)) / 2h`.
pub fn fd_grad<F>(f: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::domain(format!("finite-difference step must be positive, got {h}")));
    }
    let mut probe = x.to_vec();
    Ok((0..x.len())
        .map(|j| {
            probe[j] = x[j] + h;
            let up = f(&probe);
            probe[j] = x[j] - h;
            let down = f(&probe);
            probe[j] = x[j];
            (up - down) / (2.0 * h)
        })
        .collect())
}

/// Central-difference Jacobian of a vector-valued map.
pub fn fd_jacobian<F>(f: F, x: &[f64], h: f64) -> Result<Jacobian>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if !(h > 0.0) {
        return Err(Error::domain(format!("finite-difference step must be positive, got {h}")));
    }
    let rows = f(x).len();
    let mut jac = Jacobian::zeros(rows, x.len());
    let mut probe = x.to_vec();
    for j in 0..x.len() {
        probe[j] = x[j] + h;
        let up = f(&probe);
        probe[j] = x[j] - h;
        let down = f(&probe);
        probe[j] = x[j];
        for r in 0..rows {
            jac.add(r, j, (up[r] - down[r]) / (2.0 * h));
        }
    }
    Ok(jac)
}

/// Parameter-shift derivative of every output with respect to every gate
/// angle; columns of fixed gates are zero.
pub fn angle_jacobian(circuit: &Circuit, params: &[f64], features: &[f64]) -> Result<Jacobian> {
    circuit.validate()?;
    circuit.state(params, features)?;
    let rows = circuit.output_len();
    let columns: Vec<Vec<f64>> = circuit
        .ops
        .par_iter()
        .enumerate()
        .map(|(i, op)| match op.angle {
            None => vec![0.0; rows],
            Some(_) => {
                let up = circuit.outputs_with_shift(params, features, Some((i, FRAC_PI_2)));
                let down = circuit.outputs_with_shift(params, features, Some((i, -FRAC_PI_2)));
                up.iter().zip(&down).map(|(u, d)| (u - d) / 2.0).collect()
            }
        })
        .collect();
    let mut jac = Jacobian::zeros(rows, circuit.ops.len());
    for (i, col) in columns.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            jac.add(r, i, *v);
        }
    }
    Ok(jac)
}

/// Jacobian of the circuit outputs with respect to the trainable parameters.
pub fn shift_grad(circuit: &Circuit, params: &[f64], features: &[f64]) -> Result<Jacobian> {
    let per_angle = angle_jacobian(circuit, params, features)?;
    let mut jac = Jacobian::zeros(per_angle.rows, circuit.num_params);
    for (i, op) in circuit.ops.iter().enumerate() {
        if let Some((p, d)) = op.angle.and_then(|a| a.param_derivative(features)) {
            for r in 0..jac.rows {
                jac.add(r, p, per_angle.get(r, i) * d);
            }
        }
    }
    Ok(jac)
}

/// Jacobian of the circuit outputs with respect to its (already
/// pre-processed) input features.
pub fn input_grad(circuit: &Circuit, params: &[f64], features: &[f64]) -> Result<Jacobian> {
    let per_angle = angle_jacobian(circuit, params, features)?;
    let mut jac = Jacobian::zeros(per_angle.rows, circuit.num_features);
    for (i, op) in circuit.ops.iter().enumerate() {
        if let Some((f, d)) = op.angle.and_then(|a| a.feature_derivative(params)) {
            for r in 0..jac.rows {
                jac.add(r, f, per_angle.get(r, i) * d);
            }
        }
    }
    Ok(jac)
}

/// [`shift_grad`] for a spec and a raw input.
pub fn shift_grad_spec(spec: &CircuitSpec, params: &[f64], input: &CircuitInput) -> Result<Jacobian> {
    let (circuit, features) = ansatz::prepare(spec, input)?;
    shift_grad(&circuit, params, &features)
}

/// Jacobian with respect to the raw real input `y`, including the
/// pre-processing chain rule. Symbol encodings are not differentiable.
pub fn input_grad_spec(spec: &CircuitSpec, params: &[f64], y: &[f64]) -> Result<Jacobian> {
    if spec.takes_symbol() {
        return Err(Error::config(format!(
            "{:?} encoding loads a discrete symbol and has no input gradient",
            spec.encoding.kind
        )));
    }
    let (circuit, features) = ansatz::prepare(spec, &CircuitInput::Features(y.to_vec()))?;
    let mut jac = input_grad(&circuit, params, &features)?;
    let dpre = ansatz::preprocess_derivative(spec.preprocess, y);
    for r in 0..jac.rows {
        for (c, d) in dpre.iter().enumerate() {
            jac.data[r * jac.cols + c] *= d;
        }
    }
    Ok(jac)
}

/// Gradients of `sum_k upstream[k] * output_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitVjp {
    pub params: Vec<f64>,
    pub features: Vec<f64>,
}

/// Adjoint-mode vector-Jacobian product. `state` must be the circuit's
/// final state for `(params, features)`.
pub fn vjp_from_state(
    circuit: &Circuit,
    params: &[f64],
    features: &[f64],
    state: &StateVector,
    upstream: &[f64],
) -> Result<CircuitVjp> {
    if upstream.len() != circuit.output_len() {
        return Err(Error::domain(format!(
            "upstream gradient has {} entries, circuit emits {}",
            upstream.len(),
            circuit.output_len()
        )));
    }
    let mut psi = state.clone();
    // lambda = O |psi> with O = sum_k upstream_k O_k
    let mut lambda = match &circuit.head {
        Head::Expectations(words) => {
            let mut acc = vec![Complex64::new(0.0, 0.0); psi.amplitudes().len()];
            for (w, &g) in words.iter().zip(upstream) {
                if g == 0.0 {
                    continue;
                }
                let mut image = psi.clone();
                image.apply_pauli_word(w);
                for (a, b) in acc.iter_mut().zip(image.amplitudes()) {
                    *a += b * g;
                }
            }
            StateVector::from_amplitudes(acc)?
        }
        Head::Probabilities(subset) => {
            let outcome = psi.outcome_indices(subset);
            let amps = psi
                .amplitudes()
                .iter()
                .zip(&outcome)
                .map(|(a, &b)| a * upstream[b])
                .collect();
            StateVector::from_amplitudes(amps)?
        }
    };
    let mut dparams = vec![0.0; circuit.num_params];
    let mut dfeatures = vec![0.0; circuit.num_features];
    for op in circuit.ops.iter().rev() {
        let angle_value = op.angle.map_or(0.0, |a| a.value(params, features));
        if let (Some(angle), Some(generator)) = (op.angle, op.kind.generator()) {
            // d<psi|O|psi>/da = 2 Re <lambda| (-i/2) G |psi> = Im <lambda|G|psi>
            let d_angle = lambda.pauli_matrix_element(&generator, &psi).im;
            if let Some((p, d)) = angle.param_derivative(features) {
                dparams[p] += d_angle * d;
            }
            if let Some((f, d)) = angle.feature_derivative(params) {
                dfeatures[f] += d_angle * d;
            }
        }
        let inverse = op.kind.gate(angle_value).inverse();
        psi.apply_unchecked(&inverse);
        lambda.apply_unchecked(&inverse);
    }
    Ok(CircuitVjp { params: dparams, features: dfeatures })
}

/// Adjoint-mode vector-Jacobian product, running the forward pass itself.
pub fn vjp(circuit: &Circuit, params: &[f64], features: &[f64], upstream: &[f64]) -> Result<CircuitVjp> {
    circuit.validate()?;
    let state = circuit.state(params, features)?;
    vjp_from_state(circuit, params, features, &state, upstream)
}
