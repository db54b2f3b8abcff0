//! End-to-end channel autoencoders: symbol -> TX -> normalize -> channel ->
//! RX -> distribution over symbols, trained with cross-entropy and Adam.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{self, Circuit, CircuitSpec, HeadKind};
use crate::channel::{ChannelConfig, ChannelDraw, SigmaMode};
use crate::classical::{self, Activation, DenseStack, LookupEncoder, StackCache};
use crate::error::{Error, Result};
use crate::qgrad;
use crate::qstate::StateVector;

/// Probability floor inside the log of the cross-entropy.
pub const P_MIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TxSpec {
    /// `M x 2n` table.
    Lookup,
    /// One-hot input, ReLU hidden layers, linear output.
    Dense { hidden: Vec<usize> },
    Quantum { circuit: CircuitSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RxSpec {
    /// ReLU hidden layers, softmax output over `M` symbols.
    Dense { hidden: Vec<usize> },
    Quantum { circuit: CircuitSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub m: usize,
    pub n: usize,
    pub tx: TxSpec,
    pub rx: RxSpec,
    pub channel: ChannelConfig,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        let ctx = |msg: String| Error::config(format!("model {:?}: {msg}", self.name));
        if self.m < 2 {
            return Err(ctx(format!("M must be at least 2, got {}", self.m)));
        }
        if self.n == 0 {
            return Err(ctx("n must be at least 1".into()));
        }
        self.channel.validate()?;
        if self.channel.n != self.n {
            return Err(ctx(format!("channel has n={} but the model uses n={}", self.channel.n, self.n)));
        }
        let dim = 2 * self.n;
        if let TxSpec::Quantum { circuit } = &self.tx {
            circuit.validate()?;
            if !circuit.takes_symbol() {
                return Err(ctx(format!("quantum TX must load a symbol, {:?} loads features", circuit.encoding.kind)));
            }
            if circuit.m != self.m {
                return Err(ctx(format!("quantum TX has M={}, model has M={}", circuit.m, self.m)));
            }
            if circuit.output_len() != dim {
                return Err(ctx(format!("quantum TX emits {} values, channel needs 2n={dim}", circuit.output_len())));
            }
        }
        if let RxSpec::Quantum { circuit } = &self.rx {
            circuit.validate()?;
            if circuit.takes_symbol() {
                return Err(ctx(format!(
                    "quantum RX needs a differentiable feature encoding, {:?} loads symbols",
                    circuit.encoding.kind
                )));
            }
            if circuit.input_dim() != dim {
                return Err(ctx(format!("quantum RX reads {} features, channel emits 2n={dim}", circuit.input_dim())));
            }
            if circuit.measurement.head != HeadKind::Probabilities {
                return Err(ctx("quantum RX must use a probability head".into()));
            }
            if circuit.output_len() < self.m {
                return Err(ctx(format!("quantum RX has {} outcomes for M={}", circuit.output_len(), self.m)));
            }
        }
        Ok(())
    }

    pub fn tx_param_count(&self) -> usize {
        match &self.tx {
            TxSpec::Lookup => 2 * self.n * self.m,
            TxSpec::Dense { hidden } => DenseStack::mlp_param_count(self.m, hidden, 2 * self.n),
            TxSpec::Quantum { circuit } => ansatz::param_count(circuit),
        }
    }

    pub fn rx_param_count(&self) -> usize {
        match &self.rx {
            RxSpec::Dense { hidden } => DenseStack::mlp_param_count(2 * self.n, hidden, self.m),
            RxSpec::Quantum { circuit } => ansatz::param_count(circuit),
        }
    }

    pub fn param_count(&self) -> usize {
        self.tx_param_count() + self.rx_param_count()
    }

    pub fn tx_kind(&self) -> &'static str {
        match self.tx {
            TxSpec::Lookup => "lookup",
            TxSpec::Dense { .. } => "dense",
            TxSpec::Quantum { .. } => "quantum",
        }
    }

    pub fn rx_kind(&self) -> &'static str {
        match self.rx {
            RxSpec::Dense { .. } => "dense",
            RxSpec::Quantum { .. } => "quantum",
        }
    }
}

#[derive(Clone, Debug)]
enum Tx {
    Lookup(LookupEncoder),
    Dense(DenseStack),
    /// One compiled circuit per symbol.
    Quantum { circuits: Vec<Circuit>, params: Vec<f64> },
}

#[derive(Clone, Debug)]
enum Rx {
    Dense(DenseStack),
    Quantum { spec: CircuitSpec, circuit: Circuit, params: Vec<f64> },
}

/// An assembled model with live parameters.
#[derive(Clone, Debug)]
pub struct Model {
    pub spec: ModelSpec,
    tx: Tx,
    rx: Rx,
}

/// A symbol and the channel realization it meets.
#[derive(Clone, Debug, PartialEq)]
pub struct Transmission {
    pub symbol: usize,
    pub draw: ChannelDraw,
}

#[derive(Clone, Debug)]
enum RxCache {
    Dense(StackCache),
    Quantum { raw: Vec<f64>, features: Vec<f64>, state: StateVector, probs: Vec<f64> },
}

/// Intermediates of one forward pass.
#[derive(Clone, Debug)]
pub struct Forward {
    pub symbol: usize,
    pub x_raw: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Distribution over the `M` symbols.
    pub dist: Vec<f64>,
    draw: ChannelDraw,
    tx_state: Option<StateVector>,
    rx: RxCache,
}

impl Forward {
    pub fn decoded(&self) -> usize {
        argmax(&self.dist) + 1
    }

    pub fn loss(&self) -> f64 {
        xent_loss(&self.dist, self.symbol)
    }
}

pub fn assemble<R: Rng + ?Sized>(spec: &ModelSpec, rng: &mut R) -> Result<Model> {
    spec.validate()?;
    let dim = 2 * spec.n;
    let tx = match &spec.tx {
        TxSpec::Lookup => Tx::Lookup(LookupEncoder::new(spec.m, spec.n, rng)),
        TxSpec::Dense { hidden } => Tx::Dense(DenseStack::mlp(spec.m, hidden, dim, Activation::Linear, rng)),
        TxSpec::Quantum { circuit } => Tx::Quantum {
            circuits: (1..=spec.m).map(|s| ansatz::compile(circuit, Some(s))).collect::<Result<_>>()?,
            params: ansatz::init_params(circuit, rng),
        },
    };
    let rx = match &spec.rx {
        RxSpec::Dense { hidden } => Rx::Dense(DenseStack::mlp(dim, hidden, spec.m, Activation::Softmax, rng)),
        RxSpec::Quantum { circuit } => Rx::Quantum {
            spec: circuit.clone(),
            circuit: ansatz::compile(circuit, None)?,
            params: ansatz::init_params(circuit, rng),
        },
    };
    Ok(Model { spec: spec.clone(), tx, rx })
}

impl Model {
    pub fn new(spec: &ModelSpec, seed: u64) -> Result<Model> {
        assemble(spec, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn param_count(&self) -> usize {
        self.tx_param_count() + self.rx_param_count()
    }

    fn tx_param_count(&self) -> usize {
        match &self.tx {
            Tx::Lookup(t) => t.param_count(),
            Tx::Dense(s) => s.param_count(),
            Tx::Quantum { params, .. } => params.len(),
        }
    }

    fn rx_param_count(&self) -> usize {
        match &self.rx {
            Rx::Dense(s) => s.param_count(),
            Rx::Quantum { params, .. } => params.len(),
        }
    }

    /// TX parameters followed by RX parameters.
    pub fn params(&self) -> Vec<f64> {
        let mut out = match &self.tx {
            Tx::Lookup(t) => t.table.clone(),
            Tx::Dense(s) => s.flatten(),
            Tx::Quantum { params, .. } => params.clone(),
        };
        match &self.rx {
            Rx::Dense(s) => out.extend(s.flatten()),
            Rx::Quantum { params, .. } => out.extend_from_slice(params),
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::domain(format!("model has {} parameters, got {}", self.param_count(), flat.len())));
        }
        let (t, r) = flat.split_at(self.tx_param_count());
        match &mut self.tx {
            Tx::Lookup(enc) => enc.table.copy_from_slice(t),
            Tx::Dense(s) => s.load(t)?,
            Tx::Quantum { params, .. } => params.copy_from_slice(t),
        }
        match &mut self.rx {
            Rx::Dense(s) => s.load(r)?,
            Rx::Quantum { params, .. } => params.copy_from_slice(r),
        }
        Ok(())
    }

    fn check_symbol(&self, s: usize) -> Result<()> {
        if s == 0 || s > self.spec.m {
            return Err(Error::domain(format!("symbol {s} outside 1..={}", self.spec.m)));
        }
        Ok(())
    }

    /// Unnormalized TX output for symbol `s`.
    fn tx_raw(&self, s: usize) -> Result<(Vec<f64>, Option<StateVector>)> {
        self.check_symbol(s)?;
        match &self.tx {
            Tx::Lookup(t) => Ok((t.forward(s)?, None)),
            Tx::Dense(st) => Ok((st.forward(&classical::one_hot(s, self.spec.m))?.output, None)),
            Tx::Quantum { circuits, params } => {
                let c = &circuits[s - 1];
                let state = c.state(params, &[])?;
                Ok((c.head_outputs(&state), Some(state)))
            }
        }
    }

    /// Normalized constellation point for `s`.
    pub fn encode(&self, s: usize) -> Result<Vec<f64>> {
        classical::normalize_floored(&self.tx_raw(s)?.0)
    }

    /// The full constellation, one point per symbol.
    pub fn constellation(&self) -> Result<Vec<Vec<f64>>> {
        (1..=self.spec.m).map(|s| self.encode(s)).collect()
    }

    fn receive(&self, y: &[f64]) -> Result<(Vec<f64>, RxCache)> {
        match &self.rx {
            Rx::Dense(st) => {
                let cache = st.forward(y)?;
                Ok((cache.output.clone(), RxCache::Dense(cache)))
            }
            Rx::Quantum { spec, circuit, params } => {
                let features = ansatz::preprocess(spec.preprocess, y);
                let state = circuit.state(params, &features)?;
                let probs = circuit.head_outputs(&state);
                let dist = designated(&probs, self.spec.m);
                Ok((dist, RxCache::Quantum { raw: y.to_vec(), features, state, probs }))
            }
        }
    }

    /// Distribution over symbols for a received vector.
    pub fn decode_dist(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.receive(y)?.0)
    }

    pub fn forward_one(&self, t: &Transmission) -> Result<Forward> {
        let (x_raw, tx_state) = self.tx_raw(t.symbol)?;
        let x = classical::normalize_floored(&x_raw)?;
        let y = t.draw.apply(&x)?;
        let (dist, rx) = self.receive(&y)?;
        Ok(Forward { symbol: t.symbol, x_raw, x, y, dist, draw: t.draw.clone(), tx_state, rx })
    }

    /// Fresh channel draws at noise level `sigma` for each symbol, in order.
    pub fn transmissions<R: Rng + ?Sized>(&self, symbols: &[usize], sigma: f64, rng: &mut R) -> Vec<Transmission> {
        symbols
            .iter()
            .map(|&symbol| Transmission { symbol, draw: self.spec.channel.draw(sigma, rng) })
            .collect()
    }

    /// Uniform symbols with fresh channel draws.
    pub fn sample_batch<R: Rng + ?Sized>(&self, batch: usize, sigma: f64, rng: &mut R) -> Vec<Transmission> {
        let symbols: Vec<usize> = (0..batch).map(|_| rng.random_range(1..=self.spec.m)).collect();
        self.transmissions(&symbols, sigma, rng)
    }

    pub fn forward(&self, symbols: &[usize], sigma: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Forward>> {
        let ts = self.transmissions(symbols, sigma, rng);
        self.forward_batch(&ts)
    }

    pub fn forward_batch(&self, batch: &[Transmission]) -> Result<Vec<Forward>> {
        batch.par_iter().map(|t| self.forward_one(t)).collect()
    }

    /// Parameter gradient of `upstream . dist`.
    pub fn backward(&self, f: &Forward, upstream: &[f64]) -> Result<Vec<f64>> {
        if upstream.len() != self.spec.m {
            return Err(Error::domain(format!("upstream has {} entries for M={}", upstream.len(), self.spec.m)));
        }
        match &f.rx {
            RxCache::Dense(cache) => {
                let Rx::Dense(st) = &self.rx else { unreachable!() };
                let (gy, grx) = st.backward(cache, upstream);
                self.backward_tx(f, &gy, grx)
            }
            RxCache::Quantum { probs, .. } => {
                let z: f64 = probs[..self.spec.m].iter().sum::<f64>().max(P_MIN);
                let dot: f64 = upstream.iter().zip(&f.dist).map(|(g, q)| g * q).sum();
                let mut gp = vec![0.0; probs.len()];
                for (j, g) in upstream.iter().enumerate() {
                    gp[j] = (g - dot) / z;
                }
                self.backward_quantum_rx(f, &gp)
            }
        }
    }

    /// Gradient of the cross-entropy of one sample.
    pub fn loss_backward(&self, f: &Forward) -> Result<Vec<f64>> {
        match &f.rx {
            RxCache::Dense(cache) => {
                let Rx::Dense(st) = &self.rx else { unreachable!() };
                let mut dz = f.dist.clone();
                dz[f.symbol - 1] -= 1.0;
                let (gy, grx) = st.backward_pre(cache, dz);
                self.backward_tx(f, &gy, grx)
            }
            RxCache::Quantum { probs, .. } => {
                // L = -ln(p_s / Z), Z the mass on the M designated outcomes
                let m = self.spec.m;
                let z: f64 = probs[..m].iter().sum::<f64>().max(P_MIN);
                let ps = probs[f.symbol - 1].max(P_MIN * z);
                let mut gp = vec![0.0; probs.len()];
                for g in gp.iter_mut().take(m) {
                    *g = 1.0 / z;
                }
                gp[f.symbol - 1] -= 1.0 / ps;
                self.backward_quantum_rx(f, &gp)
            }
        }
    }

    fn backward_quantum_rx(&self, f: &Forward, gp: &[f64]) -> Result<Vec<f64>> {
        let (Rx::Quantum { spec, circuit, params }, RxCache::Quantum { raw, features, state, .. }) = (&self.rx, &f.rx)
        else {
            unreachable!()
        };
        let v = qgrad::vjp_from_state(circuit, params, features, state, gp)?;
        let dpre = ansatz::preprocess_derivative(spec.preprocess, raw);
        let gy: Vec<f64> = v.features.iter().zip(&dpre).map(|(a, b)| a * b).collect();
        self.backward_tx(f, &gy, v.params)
    }

    fn backward_tx(&self, f: &Forward, gy: &[f64], grx: Vec<f64>) -> Result<Vec<f64>> {
        let gx = f.draw.backward(gy);
        let graw = classical::normalize_floored_backward(&f.x_raw, &gx)?;
        let mut grad = match &self.tx {
            Tx::Lookup(t) => t.backward(f.symbol, &graw)?,
            Tx::Dense(st) => {
                let cache = st.forward(&classical::one_hot(f.symbol, self.spec.m))?;
                st.backward(&cache, &graw).1
            }
            Tx::Quantum { circuits, params } => {
                let c = &circuits[f.symbol - 1];
                let state = f.tx_state.as_ref().expect("quantum TX caches its state");
                qgrad::vjp_from_state(c, params, &[], state, &graw)?.params
            }
        };
        grad.extend(grx);
        Ok(grad)
    }

    /// Mean loss, mean gradient and SER over a batch.
    pub fn batch_loss_grad(&self, batch: &[Transmission]) -> Result<BatchStats> {
        let per: Vec<(f64, bool, Vec<f64>)> = batch
            .par_iter()
            .map(|t| {
                let f = self.forward_one(t)?;
                let g = self.loss_backward(&f)?;
                Ok((f.loss(), f.decoded() != t.symbol, g))
            })
            .collect::<Result<_>>()?;
        let scale = 1.0 / batch.len() as f64;
        let mut grad = vec![0.0; self.param_count()];
        let (mut loss, mut errors) = (0.0, 0usize);
        for (l, wrong, g) in &per {
            loss += l;
            errors += *wrong as usize;
            for (a, b) in grad.iter_mut().zip(g) {
                *a += b;
            }
        }
        grad.iter_mut().for_each(|g| *g *= scale);
        Ok(BatchStats { loss: loss * scale, ser: errors as f64 * scale, grad })
    }

    pub fn batch_loss(&self, batch: &[Transmission]) -> Result<f64> {
        let fs = self.forward_batch(batch)?;
        Ok(fs.iter().map(Forward::loss).sum::<f64>() / batch.len() as f64)
    }

    /// Decoded symbols for a batch.
    pub fn predict(&self, batch: &[Transmission]) -> Result<Vec<usize>> {
        batch
            .par_iter()
            .map(|t| {
                let x = self.encode(t.symbol)?;
                let y = t.draw.apply(&x)?;
                Ok(argmax(&self.receive(&y)?.0) + 1)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct BatchStats {
    pub loss: f64,
    pub ser: f64,
    pub grad: Vec<f64>,
}

/// First `m` entries of `probs`, renormalized.
fn designated(probs: &[f64], m: usize) -> Vec<f64> {
    let z: f64 = probs[..m].iter().sum();
    if z > 0.0 {
        probs[..m].iter().map(|p| p / z).collect()
    } else {
        vec![1.0 / m as f64; m]
    }
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// `-ln p[s-1]`, with `p` floored at [`P_MIN`].
pub fn xent_loss(p: &[f64], s: usize) -> f64 {
    -p[s - 1].max(P_MIN).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(len: usize, lr: f64) -> Self {
        AdamState { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m: vec![0.0; len], v: vec![0.0; len] }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
    }
}

pub fn adam_step(state: &mut AdamState, params: &mut [f64], grads: &[f64]) {
    state.step(params, grads)
}

fn default_batch() -> usize {
    64
}

fn default_lr() -> f64 {
    0.01
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub steps: usize,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    /// Falls back to the model's channel level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_ebn0_db: Option<f64>,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(steps: usize, lr: f64, seed: u64) -> Self {
        TrainConfig { steps, batch: 64, lr, train_ebn0_db: None, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch == 0 {
            return Err(Error::config("train.batch must be positive"));
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::config(format!("train.lr must be positive, got {}", self.lr)));
        }
        Ok(())
    }
}

/// Window for the reported final training loss and SER.
pub const FINAL_WINDOW: usize = 100;

/// Samples used to score the untrained model.
const INITIAL_EVAL: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub model: ModelSpec,
    pub seed: u64,
    pub steps: usize,
    pub batch: usize,
    pub lr: f64,
    pub train_ebn0_db: f64,
    pub sigma_mode: SigmaMode,
    pub param_count: usize,
    pub initial_ser: f64,
    /// Mean over the last [`FINAL_WINDOW`] steps (`initial_ser` for 0 steps).
    pub final_loss: f64,
    pub final_ser: f64,
    /// First step whose loss is within 5% of `final_loss`.
    pub convergence_step: usize,
    pub loss: Vec<f64>,
    pub ser: Vec<f64>,
    pub final_params: Vec<f64>,
    /// Kept out of the JSON so repeated runs serialize identically.
    #[serde(skip)]
    pub wall_clock_s: f64,
}

impl TrainRecord {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Rebuilds the trained model.
    pub fn model(&self) -> Result<Model> {
        let mut m = Model::new(&self.model, self.seed)?;
        m.set_params(&self.final_params)?;
        Ok(m)
    }
}

pub fn train(spec: &ModelSpec, cfg: &TrainConfig) -> Result<(Model, TrainRecord)> {
    cfg.validate()?;
    let started = std::time::Instant::now();
    let mut model = Model::new(spec, cfg.seed)?;
    let mut data = ChaCha8Rng::seed_from_u64(cfg.seed);
    data.set_stream(1);
    let ebn0 = cfg.train_ebn0_db.unwrap_or(spec.channel.ebn0_db);
    let sigma = spec.channel.sigma_at(ebn0);

    let probe = model.sample_batch(INITIAL_EVAL, sigma, &mut data);
    let predicted = model.predict(&probe)?;
    let initial_ser = crate::eval::ser_symbols(&predicted, &probe.iter().map(|t| t.symbol).collect::<Vec<_>>())?;

    let mut params = model.params();
    let mut adam = AdamState::new(params.len(), cfg.lr);
    let mut losses = Vec::with_capacity(cfg.steps);
    let mut sers = Vec::with_capacity(cfg.steps);
    for step in 0..cfg.steps {
        let batch = model.sample_batch(cfg.batch, sigma, &mut data);
        let stats = model.batch_loss_grad(&batch)?;
        if !stats.loss.is_finite() || stats.grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence { step, loss: stats.loss });
        }
        losses.push(stats.loss);
        sers.push(stats.ser);
        adam.step(&mut params, &stats.grad);
        model.set_params(&params)?;
    }

    let tail = |v: &[f64]| {
        let w = &v[v.len().saturating_sub(FINAL_WINDOW)..];
        w.iter().sum::<f64>() / w.len() as f64
    };
    let (final_loss, final_ser) = if losses.is_empty() {
        (f64::NAN, initial_ser)
    } else {
        (tail(&losses), tail(&sers))
    };
    let convergence_step = losses.iter().position(|l| *l <= 1.05 * final_loss).unwrap_or(losses.len());
    let record = TrainRecord {
        model: spec.clone(),
        seed: cfg.seed,
        steps: cfg.steps,
        batch: cfg.batch,
        lr: cfg.lr,
        train_ebn0_db: ebn0,
        sigma_mode: spec.channel.sigma_mode,
        param_count: model.param_count(),
        initial_ser,
        final_loss: if final_loss.is_nan() { 0.0 } else { final_loss },
        final_ser,
        convergence_step,
        loss: losses,
        ser: sers,
        final_params: params,
        wall_clock_s: started.elapsed().as_secs_f64(),
    };
    Ok((model, record))
}
