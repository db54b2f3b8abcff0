//! Symbol error rate, SNR sweeps and a maximum-likelihood QPSK reference.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autoencoder::Model;
use crate::channel::{sigma_for, SigmaMode};
use crate::error::{Error, Result};

pub const DEFAULT_LEVELS: [f64; 7] = [0.0, 3.0, 6.0, 9.0, 12.0, 15.0, 18.0];

/// Fraction of positions where `predictions` differs from `truth`.
pub fn ser_symbols(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    if predictions.is_empty() || predictions.len() != truth.len() {
        return Err(Error::domain(format!(
            "SER needs equal non-empty batches, got {} predictions and {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    let wrong = predictions.iter().zip(truth).filter(|(p, t)| p != t).count();
    Ok(wrong as f64 / truth.len() as f64)
}

/// SER from per-sample distributions, decoding by argmax (symbols `1..=M`).
pub fn ser(dists: &[Vec<f64>], truth: &[usize]) -> Result<f64> {
    let predictions: Vec<usize> = dists.iter().map(|d| crate::autoencoder::argmax(d) + 1).collect();
    ser_symbols(&predictions, truth)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub ebn0_db: f64,
    pub ser: f64,
    pub batches: usize,
    pub batch_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub model: String,
    pub seed: u64,
    pub sigma_mode: SigmaMode,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn ser_at(&self, ebn0_db: f64) -> Option<f64> {
        self.points.iter().find(|p| (p.ebn0_db - ebn0_db).abs() < 1e-9).map(|p| p.ser)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("ebn0_db,ser,batches,batch_size,seed,sigma_mode\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.ebn0_db, p.ser, p.batches, p.batch_size, self.seed, self.sigma_mode
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default = "default_batches")]
    pub batches: usize,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_levels() -> Vec<f64> {
    DEFAULT_LEVELS.to_vec()
}

fn default_batches() -> usize {
    10
}

fn default_batch() -> usize {
    64
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { levels: default_levels(), batches: 10, batch: 64, seed: 0 }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::config("eval.levels is empty"));
        }
        if self.batches < 10 {
            return Err(Error::config(format!("eval.batches must be at least 10, got {}", self.batches)));
        }
        if self.batch == 0 {
            return Err(Error::config("eval.batch must be positive"));
        }
        Ok(())
    }
}

/// SER of a frozen model at each level, with fresh channel draws from a
/// per-level stream of `cfg.seed`.
pub fn snr_sweep(model: &Model, cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let points = cfg
        .levels
        .par_iter()
        .enumerate()
        .map(|(i, &db)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64 + 1);
            let sigma = model.spec.channel.sigma_at(db);
            let mut wrong = 0usize;
            for _ in 0..cfg.batches {
                let batch = model.sample_batch(cfg.batch, sigma, &mut rng);
                let pred = model.predict(&batch)?;
                wrong += pred.iter().zip(&batch).filter(|(p, t)| **p != t.symbol).count();
            }
            Ok(SweepPoint {
                ebn0_db: db,
                ser: wrong as f64 / (cfg.batches * cfg.batch) as f64,
                batches: cfg.batches,
                batch_size: cfg.batch,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        model: model.spec.name.clone(),
        seed: cfg.seed,
        sigma_mode: model.spec.channel.sigma_mode,
        points,
    })
}

/// Monte-Carlo SER of unit-energy QPSK with minimum-distance detection over
/// AWGN at rate 2 bits per use.
pub fn qpsk_ml_oracle(levels: &[f64], samples: usize, mode: SigmaMode, seed: u64) -> Vec<f64> {
    levels
        .iter()
        .enumerate()
        .map(|(i, &db)| qpsk_ser_at_sigma(sigma_for(2.0, db, mode), samples, seed, i as u64))
        .collect()
}

pub fn qpsk_ser_at_sigma(sigma: f64, samples: usize, seed: u64, stream: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let mut wrong = 0usize;
    for _ in 0..samples {
        // by symmetry, send (+a, +a); errors when either component flips sign
        let nr: f64 = StandardNormal.sample(&mut rng);
        let ni: f64 = StandardNormal.sample(&mut rng);
        if a + sigma * nr < 0.0 || a + sigma * ni < 0.0 {
            wrong += 1;
        }
    }
    wrong as f64 / samples as f64
}

/// `2Q(a/sigma) - Q(a/sigma)^2` with `a = 1/sqrt(2)`.
pub fn qpsk_exact_ser(sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let q = 0.5 * erfc(std::f64::consts::FRAC_1_SQRT_2 / sigma / std::f64::consts::SQRT_2);
    2.0 * q - q * q
}

// Numerical Recipes erfc, relative error below 1.2e-7.
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let r = t * (-z * z - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807
                            + t * (-1.13520398 + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))))))
        .exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::{train, ModelSpec, RxSpec, TrainConfig, TxSpec};
    use crate::channel::ChannelConfig;
    use rand::Rng;

    #[test]
    fn ser_examples() {
        assert_eq!(ser_symbols(&[1, 2, 3], &[1, 2, 3]).unwrap(), 0.0);
        assert_eq!(ser_symbols(&[2, 3, 4], &[1, 2, 3]).unwrap(), 1.0);
        assert!(matches!(ser_symbols(&[], &[]), Err(Error::Domain(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let truth: Vec<usize> = (0..10_000).map(|_| rng.random_range(1..=4)).collect();
        let guess: Vec<usize> = (0..10_000).map(|_| rng.random_range(1..=4)).collect();
        assert!((ser_symbols(&guess, &truth).unwrap() - 0.75).abs() < 0.02);
        let d = vec![vec![0.1, 0.7, 0.1, 0.1], vec![0.5, 0.2, 0.2, 0.1]];
        assert_eq!(ser(&d, &[2, 2]).unwrap(), 0.5);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(qpsk_ser_at_sigma(0.0, 1000, 0, 0), 0.0);
        let high = qpsk_ml_oracle(&[15.0], 100_000, SigmaMode::Textbook, 3);
        assert_eq!(high[0], 0.0);
        let levels: Vec<f64> = (0..=15).map(|d| d as f64).collect();
        let curve = qpsk_ml_oracle(&levels[..8], 100_000, SigmaMode::Textbook, 4);
        assert!(curve.windows(2).all(|w| w[1] < w[0]), "{curve:?}");
    }

    #[test]
    fn oracle_matches_closed_form() {
        for db in [0.0, 3.0, 6.0] {
            let sigma = sigma_for(2.0, db, SigmaMode::Textbook);
            let mc = qpsk_ser_at_sigma(sigma, 200_000, 7, 0);
            let exact = qpsk_exact_ser(sigma);
            assert!((mc - exact).abs() < 4.0 * (exact / 200_000.0).sqrt() + 1e-4, "{db}: {mc} vs {exact}");
        }
    }

    #[test]
    fn sweep_is_reproducible_and_does_not_touch_params() {
        let spec = ModelSpec {
            name: "cc".into(),
            m: 4,
            n: 1,
            tx: TxSpec::Lookup,
            rx: RxSpec::Dense { hidden: vec![8] },
            channel: ChannelConfig::awgn(4, 1, 15.0),
        };
        let (model, _) = train(&spec, &TrainConfig::new(200, 0.05, 2)).unwrap();
        let before = model.params();
        let cfg = SweepConfig::default();
        let a = snr_sweep(&model, &cfg).unwrap();
        let b = snr_sweep(&model, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(model.params(), before);
        assert!(a.to_csv().starts_with("ebn0_db,ser,batches,batch_size,seed,sigma_mode\n0,"));
        assert!(matches!(snr_sweep(&model, &SweepConfig { batches: 3, ..cfg }), Err(Error::Config(_))));
    }
}
