//! Dense layers, lookup-table encoder and the transmitter power
//! normalization, each with an exact backward pass.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Softmax,
    Linear,
}

impl Activation {
    pub fn apply(self, z: &[f64]) -> Vec<f64> {
        match self {
            Activation::Linear => z.to_vec(),
            Activation::Relu => z.iter().map(|v| v.max(0.0)).collect(),
            Activation::Softmax => softmax(z),
        }
    }

    /// Pull `upstream` (gradient on the activation output `a`) back to the
    /// pre-activation `z`.
    pub fn backward(self, z: &[f64], a: &[f64], upstream: &[f64]) -> Vec<f64> {
        match self {
            Activation::Linear => upstream.to_vec(),
            Activation::Relu => z
                .iter()
                .zip(upstream)
                .map(|(z, g)| if *z > 0.0 { *g } else { 0.0 })
                .collect(),
            Activation::Softmax => {
                let dot: f64 = a.iter().zip(upstream).map(|(p, g)| p * g).sum();
                a.iter().zip(upstream).map(|(p, g)| p * (g - dot)).collect()
            }
        }
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = e.iter().sum();
    e.into_iter().map(|v| v / sum).collect()
}

/// `activation(W v + b)` with `W` stored row-major, `out_dim x in_dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseGrad {
    pub input: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        DenseLayer {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    /// Uniform in `+-sqrt(6 / (in + out))`, zero bias.
    pub fn xavier<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut R) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let mut layer = Self::zeros(in_dim, out_dim, activation);
        for w in &mut layer.weights {
            *w = rng.random_range(-limit..limit);
        }
        layer
    }

    pub fn param_count(&self) -> usize {
        self.in_dim * self.out_dim + self.out_dim
    }

    pub fn preactivation(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.in_dim {
            return Err(Error::domain(format!("dense layer expects {} inputs, got {}", self.in_dim, v.len())));
        }
        Ok(self
            .weights
            .chunks_exact(self.in_dim)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(v).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect())
    }

    pub fn forward(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.activation.apply(&self.preactivation(v)?))
    }

    /// Gradients given the upstream gradient on the layer output.
    pub fn backward(&self, v: &[f64], upstream: &[f64]) -> Result<DenseGrad> {
        let z = self.preactivation(v)?;
        if upstream.len() != self.out_dim {
            return Err(Error::domain(format!(
                "dense layer emits {} outputs, upstream has {}",
                self.out_dim,
                upstream.len()
            )));
        }
        let a = self.activation.apply(&z);
        Ok(self.backward_pre(v, &self.activation.backward(&z, &a, upstream)))
    }

    /// Gradients given the gradient on the pre-activation `W v + b`.
    pub fn backward_pre(&self, v: &[f64], dz: &[f64]) -> DenseGrad {
        let mut input = vec![0.0; self.in_dim];
        let mut weights = vec![0.0; self.weights.len()];
        for (o, g) in dz.iter().enumerate() {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let grow = &mut weights[o * self.in_dim..(o + 1) * self.in_dim];
            for i in 0..self.in_dim {
                input[i] += row[i] * g;
                grow[i] = v[i] * g;
            }
        }
        DenseGrad { input, weights, bias: dz.to_vec() }
    }
}

pub fn dense_forward(layer: &DenseLayer, v: &[f64]) -> Result<Vec<f64>> {
    layer.forward(v)
}

pub fn dense_backward(layer: &DenseLayer, v: &[f64], upstream: &[f64]) -> Result<DenseGrad> {
    layer.backward(v, upstream)
}

/// A feed-forward stack. Parameters flatten layer by layer, weights before
/// bias.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseStack {
    pub layers: Vec<DenseLayer>,
}

/// Per-layer inputs and pre-activations from a forward pass.
#[derive(Clone, Debug)]
pub struct StackCache {
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

impl DenseStack {
    /// ReLU hidden layers of the given widths and a final layer with
    /// `output` activation.
    pub fn mlp<R: Rng + ?Sized>(
        in_dim: usize,
        hidden: &[usize],
        out_dim: usize,
        output: Activation,
        rng: &mut R,
    ) -> Self {
        let mut dims = vec![in_dim];
        dims.extend_from_slice(hidden);
        dims.push(out_dim);
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i == last { output } else { Activation::Relu };
                DenseLayer::xavier(w[0], w[1], act, rng)
            })
            .collect();
        DenseStack { layers }
    }

    pub fn mlp_param_count(in_dim: usize, hidden: &[usize], out_dim: usize) -> usize {
        let mut dims = vec![in_dim];
        dims.extend_from_slice(hidden);
        dims.push(out_dim);
        dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn in_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.in_dim)
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_dim)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn load(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::domain(format!(
                "dense stack has {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&flat[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
        Ok(())
    }

    pub fn forward(&self, v: &[f64]) -> Result<StackCache> {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut x = v.to_vec();
        for l in &self.layers {
            let z = l.preactivation(&x)?;
            let a = l.activation.apply(&z);
            inputs.push(std::mem::replace(&mut x, a));
            pre.push(z);
        }
        Ok(StackCache { inputs, pre, output: x })
    }

    /// Backpropagate a gradient on the stack output. Returns the input
    /// gradient and the flat parameter gradient.
    pub fn backward(&self, cache: &StackCache, upstream: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let last = self.layers.len() - 1;
        let dz = self.layers[last].activation.backward(&cache.pre[last], &cache.output, upstream);
        self.backward_pre(cache, dz)
    }

    /// Same as [`backward`](Self::backward) but starting from the gradient
    /// on the final pre-activation (fused softmax cross-entropy).
    pub fn backward_pre(&self, cache: &StackCache, mut dz: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
        let mut grads: Vec<DenseGrad> = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate().rev() {
            let g = l.backward_pre(&cache.inputs[i], &dz);
            if i > 0 {
                let prev = &self.layers[i - 1];
                let a_prev = &cache.inputs[i];
                dz = prev.activation.backward(&cache.pre[i - 1], a_prev, &g.input);
            }
            grads.push(g);
        }
        grads.reverse();
        let input = grads[0].input.clone();
        let mut flat = Vec::with_capacity(self.param_count());
        for g in grads {
            flat.extend(g.weights);
            flat.extend(g.bias);
        }
        (input, flat)
    }
}

/// One row of `2n` reals per symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LookupEncoder {
    pub m: usize,
    pub dim: usize,
    pub table: Vec<f64>,
}

impl LookupEncoder {
    pub fn new<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Self {
        let dim = 2 * n;
        let table = (0..m * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        LookupEncoder { m, dim, table }
    }

    pub fn param_count(&self) -> usize {
        self.table.len()
    }

    fn check(&self, s: usize) -> Result<()> {
        if s == 0 || s > self.m {
            return Err(Error::domain(format!("symbol {s} outside 1..={}", self.m)));
        }
        Ok(())
    }

    pub fn forward(&self, s: usize) -> Result<Vec<f64>> {
        self.check(s)?;
        Ok(self.table[(s - 1) * self.dim..s * self.dim].to_vec())
    }

    /// Flat table gradient: `upstream` on row `s - 1`, zero elsewhere.
    pub fn backward(&self, s: usize, upstream: &[f64]) -> Result<Vec<f64>> {
        self.check(s)?;
        let mut g = vec![0.0; self.table.len()];
        g[(s - 1) * self.dim..s * self.dim].copy_from_slice(upstream);
        Ok(g)
    }
}

pub fn lookup_forward(enc: &LookupEncoder, s: usize) -> Result<Vec<f64>> {
    enc.forward(s)
}

/// `x sqrt(n) / |x|` for `x` in `R^{2n}`.
pub fn normalize(x: &[f64]) -> Result<Vec<f64>> {
    let (scale, _) = norm_scale(x)?;
    Ok(x.iter().map(|v| v * scale).collect())
}

fn norm_scale(x: &[f64]) -> Result<(f64, f64)> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) || x.len() % 2 != 0 {
        return Err(Error::Degenerate(format!(
            "cannot normalize a vector of length {} and norm {norm}",
            x.len()
        )));
    }
    let n = (x.len() / 2) as f64;
    Ok((n.sqrt() / norm, norm))
}

/// Vector-Jacobian product of [`normalize`]:
/// `sqrt(n)/|x| (g - xhat (xhat . g))`.
pub fn normalize_backward(x: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
    let (scale, norm) = norm_scale(x)?;
    let dot: f64 = x.iter().zip(upstream).map(|(a, g)| a * g).sum::<f64>() / norm;
    Ok(x.iter().zip(upstream).map(|(a, g)| scale * (g - a / norm * dot)).collect())
}

/// Squared-norm floor used by [`normalize_floored`].
pub const NORM_FLOOR: f64 = 1e-12;

/// [`normalize`] with `|x|^2` clamped below at [`NORM_FLOOR`], so a zero
/// vector maps to zero instead of failing. Below the floor the map is a
/// plain scaling.
pub fn normalize_floored(x: &[f64]) -> Result<Vec<f64>> {
    let scale = floored_scale(x)?.0;
    Ok(x.iter().map(|v| v * scale).collect())
}

fn floored_scale(x: &[f64]) -> Result<(f64, bool)> {
    if x.is_empty() || x.len() % 2 != 0 {
        return Err(Error::Degenerate(format!("cannot normalize a vector of length {}", x.len())));
    }
    let sq: f64 = x.iter().map(|v| v * v).sum();
    let n = (x.len() / 2) as f64;
    Ok(((n / sq.max(NORM_FLOOR)).sqrt(), sq > NORM_FLOOR))
}

pub fn normalize_floored_backward(x: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
    match floored_scale(x)? {
        (_, true) => normalize_backward(x, upstream),
        (scale, false) => Ok(upstream.iter().map(|g| g * scale).collect()),
    }
}

pub fn one_hot(s: usize, m: usize) -> Vec<f64> {
    let mut v = vec![0.0; m];
    v[s - 1] = 1.0;
    v
}
