//! Built-in model zoo, JSON experiment configs, and the run / grid / sweep
//! drivers behind the `qcae` binary.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{
    CircuitSpec, CoreLayerSpec, EncodingKind, EncodingSpec, MeasurementSpec, Preprocess, RotationKind,
};
use crate::autoencoder::{train, Model, ModelSpec, RxSpec, TrainConfig, TrainRecord, TxSpec};
use crate::channel::{ChannelConfig, SigmaMode};
use crate::error::{Error, Result};
use crate::eval::{snr_sweep, SweepConfig, SweepResult};

fn two_qubit(encoding: EncodingSpec, entanglers: Vec<(usize, usize)>, layers: usize, measurement: MeasurementSpec, m: usize) -> CircuitSpec {
    CircuitSpec {
        num_qubits: 2,
        encoding,
        core: CoreLayerSpec { rotation: RotationKind::GeneralRot, entanglers, layers, reupload: false },
        measurement,
        preprocess: Preprocess::None,
        m,
    }
}

/// Basis-encoded 2-qubit encoder, one general-rotation layer, `(<Z0>, <Z1>)`.
pub fn qc1_encoder() -> CircuitSpec {
    two_qubit(EncodingSpec::new(EncodingKind::Basis), vec![(0, 1)], 1, MeasurementSpec::local_z(), 4)
}

pub fn qc2_encoder() -> CircuitSpec {
    two_qubit(EncodingSpec::new(EncodingKind::Basis), vec![], 1, MeasurementSpec::local_z(), 4)
}

/// Weighted angle decoder over both qubits.
pub fn cq1_decoder() -> CircuitSpec {
    two_qubit(
        EncodingSpec::new(EncodingKind::FeatureAngle).weighted(),
        vec![(0, 1)],
        1,
        MeasurementSpec::probabilities(vec![0, 1]),
        4,
    )
}

/// QAOA-style embedding followed by two general-rotation layers.
pub fn cq2_decoder() -> CircuitSpec {
    two_qubit(EncodingSpec::new(EncodingKind::Qaoa), vec![(0, 1)], 2, MeasurementSpec::probabilities(vec![0, 1]), 4)
}

/// 16-symbol encoder: shared weighted angle encoding re-uploaded before each
/// of two layers.
pub fn qc1_16qam_encoder() -> CircuitSpec {
    let mut c = two_qubit(
        EncodingSpec::new(EncodingKind::WeightedAngle).shared(),
        vec![(0, 1)],
        2,
        MeasurementSpec::local_z(),
        16,
    );
    c.core.reupload = true;
    c
}

/// 4-qubit decoder for `n = 2` fading: arctan inputs re-uploaded before
/// each of 16 RY layers with ring CNOTs, and measurement weights.
pub fn cq1_rayleigh_decoder() -> CircuitSpec {
    CircuitSpec {
        num_qubits: 4,
        encoding: EncodingSpec::new(EncodingKind::FeatureAngle).weighted(),
        core: CoreLayerSpec {
            rotation: RotationKind::RyOnly,
            entanglers: vec![(0, 1), (1, 2), (2, 3), (3, 0)],
            layers: 16,
            reupload: true,
        },
        measurement: MeasurementSpec::probabilities(vec![0, 1]).with_weights_on(vec![0, 1, 2, 3]),
        preprocess: Preprocess::Arctan,
        m: 4,
    }
}

fn model(name: &str, m: usize, n: usize, tx: TxSpec, rx: RxSpec, channel: ChannelConfig) -> ModelSpec {
    ModelSpec { name: name.into(), m, n, tx, rx, channel }
}

pub const ZOO_NAMES: [&str; 13] = [
    "cc1",
    "cc2",
    "cc3",
    "qc1",
    "qc2",
    "cq1",
    "cq2",
    "qq1",
    "cc1_16qam",
    "cc2_16qam",
    "qc1_16qam",
    "cq1_rayleigh",
    "cc_rayleigh",
];

/// Looks up a built-in model by name.
pub fn zoo_model(name: &str) -> Option<ModelSpec> {
    let awgn4 = ChannelConfig::awgn(4, 1, 15.0);
    let awgn16 = ChannelConfig::awgn(16, 1, 15.0);
    let fading = ChannelConfig::rayleigh(4, 2, 15.0);
    let rx4 = || RxSpec::Dense { hidden: vec![16, 8] };
    let rx16 = || RxSpec::Dense { hidden: vec![64, 32] };
    let q = |circuit| TxSpec::Quantum { circuit };
    let qr = |circuit| RxSpec::Quantum { circuit };
    Some(match name {
        "cc1" => model(name, 4, 1, TxSpec::Lookup, RxSpec::Dense { hidden: vec![2, 2] }, awgn4),
        "cc2" => model(name, 4, 1, TxSpec::Lookup, rx4(), awgn4),
        "cc3" => model(name, 4, 1, TxSpec::Dense { hidden: vec![3] }, rx4(), awgn4),
        "qc1" => model(name, 4, 1, q(qc1_encoder()), rx4(), awgn4),
        "qc2" => model(name, 4, 1, q(qc2_encoder()), rx4(), awgn4),
        "cq1" => model(name, 4, 1, TxSpec::Lookup, qr(cq1_decoder()), awgn4),
        "cq2" => model(name, 4, 1, TxSpec::Lookup, qr(cq2_decoder()), awgn4),
        "qq1" => model(name, 4, 1, q(qc1_encoder()), qr(cq1_decoder()), awgn4),
        "cc1_16qam" => model(name, 16, 1, TxSpec::Dense { hidden: vec![2] }, rx16(), awgn16),
        "cc2_16qam" => model(name, 16, 1, TxSpec::Dense { hidden: vec![16] }, rx16(), awgn16),
        "qc1_16qam" => model(name, 16, 1, q(qc1_16qam_encoder()), rx16(), awgn16),
        "cq1_rayleigh" => model(name, 4, 2, TxSpec::Lookup, qr(cq1_rayleigh_decoder()), fading),
        "cc_rayleigh" => model(name, 4, 2, TxSpec::Lookup, RxSpec::Dense { hidden: vec![14, 4] }, fading),
        _ => return None,
    })
}

pub fn zoo() -> Vec<ModelSpec> {
    ZOO_NAMES.iter().map(|n| zoo_model(n).expect("zoo name")).collect()
}

/// Default training length: 2000 steps for 4-symbol AWGN, 6000 otherwise.
pub fn default_steps(spec: &ModelSpec) -> usize {
    if spec.m == 4 && spec.channel.family == crate::channel::ChannelFamily::Awgn {
        2000
    } else {
        6000
    }
}

/// A zoo name or an inline model.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ModelRef {
    Name(String),
    Inline(ModelSpec),
}

impl<'de> Deserialize<'de> for ModelRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(name) => Ok(ModelRef::Name(name)),
            v => serde_json::from_value(v)
                .map(ModelRef::Inline)
                .map_err(|e| D::Error::custom(format!("inline model: {e}"))),
        }
    }
}

impl ModelRef {
    pub fn resolve(&self) -> Result<ModelSpec> {
        match self {
            ModelRef::Inline(m) => Ok(m.clone()),
            ModelRef::Name(n) => zoo_model(n).ok_or_else(|| {
                Error::config(format!("model {n:?} is not in the zoo (known: {})", ZOO_NAMES.join(", ")))
            }),
        }
    }
}

/// Lists crossed by `grid`. Empty lists keep the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub lr: Vec<f64>,
    /// Core layer count of every quantum half.
    #[serde(default)]
    pub layers: Vec<usize>,
    #[serde(default)]
    pub reupload: Vec<bool>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub tx_encoding: Vec<EncodingKind>,
    #[serde(default)]
    pub rx_encoding: Vec<EncodingKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainBlock {
    /// Defaults by model family, see [`default_steps`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default = "default_batch")]
    pub batch: usize,
    pub lr: f64,
    #[serde(default = "default_train_db")]
    pub train_ebn0_db: f64,
    pub seed: u64,
}

fn default_batch() -> usize {
    64
}

fn default_train_db() -> f64 {
    15.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalBlock {
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default = "default_batches")]
    pub batches: usize,
    #[serde(default = "default_batch")]
    pub batch: usize,
    /// Defaults to the training seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_levels() -> Vec<f64> {
    crate::eval::DEFAULT_LEVELS.to_vec()
}

fn default_batches() -> usize {
    10
}

impl Default for EvalBlock {
    fn default() -> Self {
        EvalBlock { levels: default_levels(), batches: 10, batch: 64, seed: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_mode: Option<SigmaMode>,
    pub train: TrainBlock,
    #[serde(default)]
    pub eval: EvalBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
}

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub sigma_mode: Option<SigmaMode>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("invalid experiment config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    /// Inline model, explicit steps, sigma mode and eval seed, overrides
    /// applied. A resolved config reproduces its run with no other input.
    pub fn resolve(&self, ov: &Overrides) -> Result<ExperimentConfig> {
        let mut spec = self.model.resolve()?;
        if let Some(mode) = ov.sigma_mode.or(self.sigma_mode) {
            spec.channel.sigma_mode = mode;
        }
        spec.validate()?;
        let mut train = self.train.clone();
        if let Some(seed) = ov.seed {
            train.seed = seed;
        }
        train.steps = Some(train.steps.unwrap_or_else(|| default_steps(&spec)));
        let mut eval = self.eval.clone();
        eval.seed = Some(match (ov.seed, eval.seed) {
            (Some(s), _) => s,
            (None, Some(s)) => s,
            (None, None) => train.seed,
        });
        let resolved = ExperimentConfig {
            model: ModelRef::Inline(spec.clone()),
            sigma_mode: Some(spec.channel.sigma_mode),
            train,
            eval,
            grid: self.grid.clone(),
        };
        resolved.train_config().validate()?;
        resolved.sweep_config().validate()?;
        Ok(resolved)
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        self.model.resolve()
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            steps: self.train.steps.unwrap_or(0),
            batch: self.train.batch,
            lr: self.train.lr,
            train_ebn0_db: Some(self.train.train_ebn0_db),
            seed: self.train.seed,
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            levels: self.eval.levels.clone(),
            batches: self.eval.batches,
            batch: self.eval.batch,
            seed: self.eval.seed.unwrap_or(self.train.seed),
        }
    }
}

/// Outcome of one `run`.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub record: TrainRecord,
    pub sweep: SweepResult,
    pub dir: PathBuf,
}

/// Parameter counts of a resolved config, without training.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DryRun {
    pub name: String,
    pub tx: &'static str,
    pub rx: &'static str,
    pub tx_params: usize,
    pub rx_params: usize,
    pub total_params: usize,
    pub steps: usize,
}

pub fn dry_run(cfg: &ExperimentConfig, ov: &Overrides) -> Result<DryRun> {
    let resolved = cfg.resolve(ov)?;
    let spec = resolved.model_spec()?;
    Model::new(&spec, resolved.train.seed)?;
    Ok(DryRun {
        name: spec.name.clone(),
        tx: spec.tx_kind(),
        rx: spec.rx_kind(),
        tx_params: spec.tx_param_count(),
        rx_params: spec.rx_param_count(),
        total_params: spec.param_count(),
        steps: resolved.train.steps.unwrap_or(0),
    })
}

/// Trains, sweeps and writes `train.json`, `sweep.csv`,
/// `config.resolved.json` and `timing.json` into `out`.
pub fn run(cfg: &ExperimentConfig, ov: &Overrides, out: &Path) -> Result<RunOutput> {
    let resolved = cfg.resolve(ov)?;
    let spec = resolved.model_spec()?;
    let (model, record) = train(&spec, &resolved.train_config())?;
    let sweep = snr_sweep(&model, &resolved.sweep_config())?;
    fs::create_dir_all(out)?;
    fs::write(out.join("config.resolved.json"), serde_json::to_string_pretty(&resolved)? + "\n")?;
    fs::write(out.join("train.json"), record.to_json()? + "\n")?;
    fs::write(out.join("sweep.csv"), sweep.to_csv())?;
    fs::write(
        out.join("timing.json"),
        serde_json::to_string_pretty(&serde_json::json!({ "wall_clock_s": record.wall_clock_s }))? + "\n",
    )?;
    Ok(RunOutput { record, sweep, dir: out.to_path_buf() })
}

/// Evaluates a saved `train.json` checkpoint.
pub fn sweep_checkpoint(train_json: &Path, eval: &SweepConfig, sigma_mode: Option<SigmaMode>) -> Result<SweepResult> {
    let text = fs::read_to_string(train_json)?;
    let record: TrainRecord = serde_json::from_str(&text)
        .map_err(|e| Error::config(format!("{} is not a training record: {e}", train_json.display())))?;
    let mut model = record.model()?;
    if let Some(mode) = sigma_mode {
        model.spec.channel.sigma_mode = mode;
    }
    snr_sweep(&model, eval)
}

/// Ranking level for grid search.
pub const RANK_DB: f64 = 15.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: usize,
    pub lr: f64,
    pub layers: Option<usize>,
    pub reupload: Option<bool>,
    pub seed: u64,
    pub tx_encoding: Option<EncodingKind>,
    pub rx_encoding: Option<EncodingKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridRow {
    pub rank: usize,
    pub point: GridPoint,
    pub ser_15db: f64,
    pub param_count: usize,
    pub convergence_step: usize,
    pub final_loss: f64,
    pub dir: String,
}

fn quantum_halves(spec: &mut ModelSpec) -> Vec<&mut CircuitSpec> {
    let mut out = Vec::new();
    if let TxSpec::Quantum { circuit } = &mut spec.tx {
        out.push(circuit);
    }
    if let RxSpec::Quantum { circuit } = &mut spec.rx {
        out.push(circuit);
    }
    out
}

/// Every grid point, in a fixed order.
pub fn grid_points(cfg: &ExperimentConfig, ov: &Overrides) -> Result<Vec<(GridPoint, ExperimentConfig)>> {
    let grid = cfg.grid.clone().ok_or_else(|| Error::config("config has no grid block"))?;
    if grid == GridConfig::default() {
        return Err(Error::config("grid block lists no values to cross"));
    }
    let base = cfg.resolve(ov)?;
    if !base.eval.levels.iter().any(|l| (l - RANK_DB).abs() < 1e-9) {
        return Err(Error::config(format!("grid ranking needs {RANK_DB} dB in eval.levels")));
    }
    let base_spec = base.model_spec()?;
    let mut probe = base_spec.clone();
    let has_quantum = !quantum_halves(&mut probe).is_empty();
    if !has_quantum && (!grid.layers.is_empty() || !grid.reupload.is_empty()) {
        return Err(Error::config("grid.layers and grid.reupload need a quantum half"));
    }
    if !grid.tx_encoding.is_empty() && !matches!(base_spec.tx, TxSpec::Quantum { .. }) {
        return Err(Error::config("grid.tx_encoding needs a quantum transmitter"));
    }
    if !grid.rx_encoding.is_empty() && !matches!(base_spec.rx, RxSpec::Quantum { .. }) {
        return Err(Error::config("grid.rx_encoding needs a quantum receiver"));
    }
    fn axis<T: Clone>(v: &[T]) -> Vec<Option<T>> {
        if v.is_empty() {
            vec![None]
        } else {
            v.iter().cloned().map(Some).collect()
        }
    }
    let lrs = if grid.lr.is_empty() { vec![base.train.lr] } else { grid.lr.clone() };
    let seeds = if grid.seeds.is_empty() { vec![base.train.seed] } else { grid.seeds.clone() };
    if grid.lr.iter().any(|l| !(*l > 0.0)) || grid.layers.contains(&0) {
        return Err(Error::config("grid values must be positive"));
    }

    let mut out = Vec::new();
    for &lr in &lrs {
        for layers in axis(&grid.layers) {
            for reupload in axis(&grid.reupload) {
                for tx_encoding in axis(&grid.tx_encoding) {
                    for rx_encoding in axis(&grid.rx_encoding) {
                        for &seed in &seeds {
                            let mut spec = base_spec.clone();
                            for c in quantum_halves(&mut spec) {
                                if let Some(l) = layers {
                                    c.core.layers = l;
                                }
                                if let Some(r) = reupload {
                                    c.core.reupload = r;
                                }
                            }
                            if let (Some(kind), TxSpec::Quantum { circuit }) = (tx_encoding, &mut spec.tx) {
                                circuit.encoding.kind = kind;
                            }
                            if let (Some(kind), RxSpec::Quantum { circuit }) = (rx_encoding, &mut spec.rx) {
                                circuit.encoding.kind = kind;
                            }
                            let index = out.len();
                            let point = GridPoint { index, lr, layers, reupload, seed, tx_encoding, rx_encoding };
                            spec.validate().map_err(|e| Error::config(format!("grid point {index} ({point:?}): {e}")))?;
                            let mut c = base.clone();
                            c.model = ModelRef::Inline(spec);
                            c.train.lr = lr;
                            c.train.seed = seed;
                            if !grid.seeds.is_empty() {
                                c.eval.seed = Some(seed);
                            }
                            c.grid = None;
                            out.push((point, c));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Runs every grid point into `out/point_XXX` and writes the ranked
/// `out/grid.csv`.
pub fn grid(cfg: &ExperimentConfig, ov: &Overrides, out: &Path) -> Result<Vec<GridRow>> {
    let points = grid_points(cfg, ov)?;
    let runs: Vec<(GridPoint, RunOutput)> = points
        .into_par_iter()
        .map(|(p, c)| {
            let dir = out.join(format!("point_{:03}", p.index));
            run(&c, &Overrides::default(), &dir).map(|r| (p, r))
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<GridRow> = runs
        .into_iter()
        .map(|(point, r)| GridRow {
            rank: 0,
            point,
            ser_15db: r.sweep.ser_at(RANK_DB).unwrap_or(1.0),
            param_count: r.record.param_count,
            convergence_step: r.record.convergence_step,
            final_loss: r.record.final_loss,
            dir: r.dir.file_name().map(|d| d.to_string_lossy().into_owned()).unwrap_or_default(),
        })
        .collect();
    rows.sort_by(|a, b| {
        a.ser_15db
            .total_cmp(&b.ser_15db)
            .then(a.param_count.cmp(&b.param_count))
            .then(a.convergence_step.cmp(&b.convergence_step))
            .then(a.point.index.cmp(&b.point.index))
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    fs::create_dir_all(out)?;
    fs::write(out.join("grid.csv"), grid_csv(&rows))?;
    Ok(rows)
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn enc_name(k: &Option<EncodingKind>) -> String {
    k.map(|k| serde_json::to_value(k).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default())
        .unwrap_or_default()
}

pub fn grid_csv(rows: &[GridRow]) -> String {
    let mut s = String::from(
        "rank,point,lr,layers,reupload,seed,tx_encoding,rx_encoding,ser_15db,param_count,convergence_step,final_loss,dir\n",
    );
    for r in rows {
        let p = &r.point;
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.rank,
            p.index,
            p.lr,
            opt(&p.layers),
            opt(&p.reupload),
            p.seed,
            enc_name(&p.tx_encoding),
            enc_name(&p.rx_encoding),
            r.ser_15db,
            r.param_count,
            r.convergence_step,
            r.final_loss,
            r.dir
        ));
    }
    s
}

/// Zoo listing as aligned text.
pub fn zoo_table() -> String {
    let mut s = format!("{:<14} {:<8} {:>6} {:<8} {:>6} {:>6}\n", "name", "tx", "params", "rx", "params", "total");
    for m in zoo() {
        s.push_str(&format!(
            "{:<14} {:<8} {:>6} {:<8} {:>6} {:>6}\n",
            m.name,
            m.tx_kind(),
            m.tx_param_count(),
            m.rx_kind(),
            m.rx_param_count(),
            m.param_count()
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(name: &str) -> (usize, usize, usize) {
        let m = zoo_model(name).unwrap();
        let built = Model::new(&m, 0).unwrap();
        assert_eq!(built.param_count(), m.param_count());
        (m.tx_param_count(), m.rx_param_count(), m.param_count())
    }

    #[test]
    fn rayleigh_weights_on_unread_qubits_are_inert() {
        use crate::ansatz::{init_params, CircuitInput};
        use rand::SeedableRng;
        let spec = cq1_rayleigh_decoder();
        let params = init_params(&spec, &mut rand_chacha::ChaCha8Rng::seed_from_u64(4));
        let input = CircuitInput::Features(vec![0.3, -1.2, 0.8, 0.1]);
        let jac = crate::qgrad::shift_grad_spec(&spec, &params, &input).unwrap();
        for col in [130, 131] {
            assert!(jac.column(col).iter().all(|v| v.abs() < 1e-12));
        }
        assert!(jac.column(128).iter().any(|v| v.abs() > 1e-6));
    }

    #[test]
    fn zoo_param_counts() {
        assert_eq!(counts("cc1"), (8, 24, 32));
        assert_eq!(counts("cc2"), (8, 220, 228));
        assert_eq!(counts("cc3"), (23, 220, 243));
        assert_eq!(counts("qc1"), (6, 220, 226));
        assert_eq!(counts("qc2"), (6, 220, 226));
        assert_eq!(counts("cq1"), (8, 8, 16));
        assert_eq!(counts("cq2"), (8, 15, 23));
        assert_eq!(counts("qq1"), (6, 8, 14));
        assert_eq!(counts("cc1_16qam").0, 40);
        assert_eq!(counts("cc2_16qam").0, 306);
        assert_eq!(counts("qc1_16qam").0, 14);
        assert_eq!(counts("cq1_rayleigh").1, 132);
        assert_eq!(counts("cc_rayleigh").1, 150);
        assert_eq!(zoo().len(), ZOO_NAMES.len());
        assert!(zoo_model("nope").is_none());
    }

    fn quick(model: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"model": "{model}", "train": {{"steps": 30, "lr": 0.01, "seed": 4}}, "eval": {{"levels": [0, 15], "batches": 10, "batch": 16}}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn config_errors_are_config_errors() {
        assert!(matches!(ExperimentConfig::from_json("{"), Err(Error::Config(_))));
        let unknown = r#"{"model": "cc1", "train": {"lr": 0.1, "seed": 0, "stepz": 3}}"#;
        let e = ExperimentConfig::from_json(unknown).unwrap_err().to_string();
        assert!(e.contains("stepz") && e.contains("line"), "{e}");
        let missing = ExperimentConfig::from_json(r#"{"model": "zz9", "train": {"lr": 0.1, "seed": 0}}"#).unwrap();
        assert!(matches!(missing.resolve(&Overrides::default()), Err(Error::Config(_))));
    }

    #[test]
    fn resolve_fills_defaults() {
        let c = ExperimentConfig::from_json(r#"{"model": "cq1_rayleigh", "train": {"lr": 0.01, "seed": 2}}"#).unwrap();
        let r = c.resolve(&Overrides { seed: Some(9), sigma_mode: Some(SigmaMode::Textbook) }).unwrap();
        assert_eq!(r.train.steps, Some(6000));
        assert_eq!(r.train.seed, 9);
        assert_eq!(r.eval.seed, Some(9));
        assert_eq!(r.model_spec().unwrap().channel.sigma_mode, SigmaMode::Textbook);
        let again = ExperimentConfig::from_json(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(again.resolve(&Overrides::default()).unwrap(), r);
    }

    #[test]
    fn run_is_deterministic_and_self_contained() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = quick("qq1");
        run(&cfg, &Overrides::default(), &dir.path().join("a")).unwrap();
        run(&cfg, &Overrides::default(), &dir.path().join("b")).unwrap();
        let read = |p: &str| fs::read(dir.path().join(p)).unwrap();
        assert_eq!(read("a/train.json"), read("b/train.json"));
        assert_eq!(read("a/sweep.csv"), read("b/sweep.csv"));
        let resolved = ExperimentConfig::load(&dir.path().join("a/config.resolved.json")).unwrap();
        run(&resolved, &Overrides::default(), &dir.path().join("c")).unwrap();
        assert_eq!(read("a/train.json"), read("c/train.json"));
        let sweep = sweep_checkpoint(&dir.path().join("a/train.json"), &resolved.sweep_config(), None).unwrap();
        assert_eq!(sweep.to_csv().into_bytes(), read("a/sweep.csv"));
    }

    #[test]
    fn grid_ranks_and_matches_run() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = quick("cq1");
        cfg.grid = Some(GridConfig { lr: vec![0.1, 0.01, 0.001], ..Default::default() });
        let rows = grid(&cfg, &Overrides::default(), dir.path()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.windows(2).all(|w| w[0].ser_15db <= w[1].ser_15db));
        let csv = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
        assert_eq!(csv.lines().count(), 4);

        let single = tempfile::tempdir().unwrap();
        let mut one = quick("cq1");
        one.grid = Some(GridConfig { lr: vec![0.01], ..Default::default() });
        grid(&one, &Overrides::default(), single.path()).unwrap();
        run(&quick("cq1"), &Overrides::default(), &single.path().join("plain")).unwrap();
        let a = fs::read(single.path().join("point_000/train.json")).unwrap();
        let b = fs::read(single.path().join("plain/train.json")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_crosses_quantum_options() {
        let mut cfg = quick("qq1");
        cfg.grid = Some(GridConfig {
            layers: vec![1, 2],
            reupload: vec![false, true],
            seeds: vec![1, 2],
            rx_encoding: vec![EncodingKind::FeatureAngle],
            ..Default::default()
        });
        let pts = grid_points(&cfg, &Overrides::default()).unwrap();
        assert_eq!(pts.len(), 8);
        let mut classical = quick("cc1");
        classical.grid = Some(GridConfig { layers: vec![2], ..Default::default() });
        assert!(matches!(grid_points(&classical, &Overrides::default()), Err(Error::Config(_))));
        let mut none = quick("cc1");
        none.grid = None;
        assert!(matches!(grid_points(&none, &Overrides::default()), Err(Error::Config(_))));
        none.grid = Some(GridConfig::default());
        assert!(matches!(grid_points(&none, &Overrides::default()), Err(Error::Config(_))));
    }
}
