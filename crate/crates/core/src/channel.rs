//! AWGN and single-path Rayleigh channels over `n` complex channel uses,
//! stored as interleaved `(re, im)` pairs.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelFamily {
    #[default]
    Awgn,
    Rayleigh,
}

/// How `Eb/N0` maps to the per-component noise standard deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// `1 / (2 R Eb/N0)`
    #[default]
    Paper,
    /// `1 / sqrt(2 R Eb/N0)`
    Textbook,
}

impl std::str::FromStr for SigmaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(SigmaMode::Paper),
            "textbook" => Ok(SigmaMode::Textbook),
            other => Err(Error::config(format!("unknown sigma mode {other:?} (expected paper or textbook)"))),
        }
    }
}

impl std::fmt::Display for SigmaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SigmaMode::Paper => "paper",
            SigmaMode::Textbook => "textbook",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub family: ChannelFamily,
    /// Bits per channel use.
    pub rate: f64,
    pub ebn0_db: f64,
    /// Complex channel uses per message.
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sigma_mode: SigmaMode,
}

impl ChannelConfig {
    pub fn awgn(m: usize, n: usize, ebn0_db: f64) -> Self {
        ChannelConfig {
            family: ChannelFamily::Awgn,
            rate: (m as f64).log2() / n as f64,
            ebn0_db,
            n,
            seed: 0,
            sigma_mode: SigmaMode::Paper,
        }
    }

    pub fn rayleigh(m: usize, n: usize, ebn0_db: f64) -> Self {
        ChannelConfig { family: ChannelFamily::Rayleigh, ..Self::awgn(m, n, ebn0_db) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0) || !self.rate.is_finite() {
            return Err(Error::config(format!("channel rate must be positive, got {}", self.rate)));
        }
        if self.n == 0 {
            return Err(Error::config("channel needs at least one use (n >= 1)"));
        }
        if !self.ebn0_db.is_finite() {
            return Err(Error::config(format!("ebn0_db must be finite, got {}", self.ebn0_db)));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        sigma_for(self.rate, self.ebn0_db, self.sigma_mode)
    }

    pub fn sigma_at(&self, ebn0_db: f64) -> f64 {
        sigma_for(self.rate, ebn0_db, self.sigma_mode)
    }

    pub fn draw<R: Rng + ?Sized>(&self, sigma: f64, rng: &mut R) -> ChannelDraw {
        ChannelDraw::sample(self.family, self.n, sigma, rng)
    }
}

/// Eb/N0 to sigma in the default `paper` mode, `1 / (2 R 10^{dB/10})`.
pub fn sigma_from_snr(rate: f64, ebn0_db: f64) -> f64 {
    sigma_for(rate, ebn0_db, SigmaMode::Paper)
}

pub fn sigma_for(rate: f64, ebn0_db: f64, mode: SigmaMode) -> f64 {
    let snr = 2.0 * rate * 10f64.powf(ebn0_db / 10.0);
    match mode {
        SigmaMode::Paper => 1.0 / snr,
        SigmaMode::Textbook => 1.0 / snr.sqrt(),
    }
}

/// One frozen realization of the channel for a single transmission.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelDraw {
    pub noise: Vec<f64>,
    /// Complex fading coefficient `(re, im)`; `None` for AWGN.
    pub fading: Option<[f64; 2]>,
}

impl ChannelDraw {
    pub fn sample<R: Rng + ?Sized>(family: ChannelFamily, n: usize, sigma: f64, rng: &mut R) -> Self {
        let fading = match family {
            ChannelFamily::Awgn => None,
            ChannelFamily::Rayleigh => Some([rng.sample(StandardNormal), rng.sample(StandardNormal)]),
        };
        let noise = (0..2 * n)
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        ChannelDraw { noise, fading }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.noise.len() {
            return Err(Error::domain(format!(
                "channel input has {} reals, draw covers {}",
                x.len(),
                self.noise.len()
            )));
        }
        let mut y = Vec::with_capacity(x.len());
        match self.fading {
            None => y.extend(x.iter().zip(&self.noise).map(|(a, b)| a + b)),
            Some([hr, hi]) => {
                for (c, w) in x.chunks_exact(2).zip(self.noise.chunks_exact(2)) {
                    y.push(hr * c[0] - hi * c[1] + w[0]);
                    y.push(hi * c[0] + hr * c[1] + w[1]);
                }
            }
        }
        Ok(y)
    }

    /// `(dy/dx)^T upstream`; multiplication by `conj(h)` for fading.
    pub fn backward(&self, upstream: &[f64]) -> Vec<f64> {
        match self.fading {
            None => upstream.to_vec(),
            Some([hr, hi]) => upstream
                .chunks_exact(2)
                .flat_map(|g| [hr * g[0] + hi * g[1], -hi * g[0] + hr * g[1]])
                .collect(),
        }
    }
}

pub fn awgn<R: Rng + ?Sized>(x: &[f64], sigma: f64, rng: &mut R) -> Result<(Vec<f64>, ChannelDraw)> {
    check_input(x, sigma)?;
    let draw = ChannelDraw::sample(ChannelFamily::Awgn, x.len() / 2, sigma, rng);
    Ok((draw.apply(x)?, draw))
}

pub fn rayleigh<R: Rng + ?Sized>(x: &[f64], sigma: f64, rng: &mut R) -> Result<(Vec<f64>, ChannelDraw)> {
    check_input(x, sigma)?;
    let draw = ChannelDraw::sample(ChannelFamily::Rayleigh, x.len() / 2, sigma, rng);
    Ok((draw.apply(x)?, draw))
}

fn check_input(x: &[f64], sigma: f64) -> Result<()> {
    if x.is_empty() || x.len() % 2 != 0 {
        return Err(Error::domain(format!("channel input must hold (re, im) pairs, got {} reals", x.len())));
    }
    if !(sigma >= 0.0) {
        return Err(Error::domain(format!("sigma must be non-negative, got {sigma}")));
    }
    Ok(())
}
