//! Synthetic stand-in for encoder features with a planted cross-modal signal.
//!
//! Each record draws latent signs `s_v, s_a ∈ {−1, +1}` and is fraud when
//! `a·s_v + b·s_a + c·s_v·s_a + ε > 0`, `ε ~ N(0, σ²)`. The first `d_sig`
//! coordinates of each modality carry `amplitude · s` on top of unit
//! Gaussian noise. Draws are accepted until both class quotas are met.

use serde::{Deserialize, Serialize};

use super::record::{Dataset, FeatureRecord, Label, FEATURE_DIM};
use crate::error::{Error, Result};
use crate::numkit::{Rng, Vector};

/// Latent draws allowed per requested record before generation gives up.
pub const MAX_DRAWS_PER_RECORD: usize = 1000;

/// Monte-Carlo estimate of [`bayes_accuracy`] for the default
/// configuration: 10⁶ latent draws from `Rng::new(0)`.
pub const DEFAULT_BAYES_CEILING: f64 = 0.93097;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_total: usize,
    pub n_fraud: usize,
    /// Weight of the video sign in the latent score.
    pub a: f64,
    /// Weight of the audio sign.
    pub b: f64,
    /// Weight of the sign product.
    pub c: f64,
    /// Standard deviation of the latent score noise.
    pub sigma: f64,
    /// Signal-carrying coordinates per modality.
    pub d_sig: usize,
    pub amplitude: f64,
    pub feature_dim: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_total: 820,
            n_fraud: 356,
            a: 0.8,
            b: 0.6,
            c: 1.0,
            sigma: 0.5,
            d_sig: 16,
            amplitude: 1.0,
            feature_dim: FEATURE_DIM,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if self.n_fraud == 0 || self.n_fraud >= self.n_total {
            return bad(format!(
                "need 0 < n_fraud < n_total, got n_fraud={} n_total={}",
                self.n_fraud, self.n_total
            ));
        }
        if self.feature_dim == 0 || self.d_sig > self.feature_dim {
            return bad(format!(
                "d_sig={} must not exceed feature_dim={}",
                self.d_sig, self.feature_dim
            ));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return bad(format!(
                "sigma must be finite and non-negative, got {}",
                self.sigma
            ));
        }
        if ![self.a, self.b, self.c, self.amplitude]
            .iter()
            .all(|v| v.is_finite())
        {
            return bad("weights and amplitude must be finite".into());
        }
        Ok(())
    }

    fn latent_label(&self, s_v: f64, s_a: f64, noise: f64) -> Label {
        if self.a * s_v + self.b * s_a + self.c * s_v * s_a + self.sigma * noise > 0.0 {
            Label::Fraud
        } else {
            Label::Legit
        }
    }

    /// `P(fraud | s_v, s_a)` under the latent rule.
    pub fn fraud_probability(&self, s_v: f64, s_a: f64) -> f64 {
        let mean = self.a * s_v + self.b * s_a + self.c * s_v * s_a;
        if self.sigma == 0.0 {
            return if mean > 0.0 { 1.0 } else { 0.0 };
        }
        // P(mean + σZ > 0) = Φ(mean/σ)
        0.5 * libm::erfc(-mean / (self.sigma * std::f64::consts::SQRT_2))
    }
}

pub fn generate_synthetic(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = Rng::new(cfg.seed);
    let mut quota = [cfg.n_total - cfg.n_fraud, cfg.n_fraud];
    let mut records = Vec::with_capacity(cfg.n_total);
    let max_draws = cfg.n_total.saturating_mul(MAX_DRAWS_PER_RECORD);
    let mut draws = 0usize;
    while records.len() < cfg.n_total {
        if draws == max_draws {
            return Err(Error::Generation(format!(
                "class quotas not met after {max_draws} draws ({} legit and {} fraud still missing)",
                quota[0], quota[1]
            )));
        }
        draws += 1;
        let s_v = rng.sign();
        let s_a = rng.sign();
        let label = cfg.latent_label(s_v, s_a, rng.normal());
        let slot = &mut quota[label as usize];
        if *slot == 0 {
            continue;
        }
        *slot -= 1;
        let video = features(cfg, s_v, &mut rng);
        let audio = features(cfg, s_a, &mut rng);
        records.push(FeatureRecord {
            id: format!("syn-{:04}", records.len()),
            video,
            audio,
            label,
        });
    }
    let provenance = format!(
        "synthetic: {}",
        serde_json::to_string(cfg).expect("config serializes")
    );
    Dataset::new(records, provenance)
}

fn features(cfg: &SynthConfig, sign: f64, rng: &mut Rng) -> Vector<f64> {
    Vector::new(
        (0..cfg.feature_dim)
            .map(|k| {
                let signal = if k < cfg.d_sig {
                    cfg.amplitude * sign
                } else {
                    0.0
                };
                signal + rng.normal()
            })
            .collect(),
    )
}

/// Which latent signs a Bayes classifier may observe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatentAccess {
    VideoOnly,
    AudioOnly,
    Both,
}

/// Closed-form accuracy of the Bayes classifier over the four equally
/// likely sign combinations (before class quotas are applied).
pub fn bayes_accuracy(cfg: &SynthConfig, access: LatentAccess) -> f64 {
    let signs = [1.0, -1.0];
    let q = |s_v: f64, s_a: f64| cfg.fraud_probability(s_v, s_a);
    let best = |p: f64| p.max(1.0 - p);
    match access {
        LatentAccess::Both => signs
            .iter()
            .flat_map(|&v| signs.iter().map(move |&a| (v, a)))
            .map(|(v, a)| 0.25 * best(q(v, a)))
            .sum(),
        LatentAccess::VideoOnly => signs
            .iter()
            .map(|&v| 0.5 * best(0.5 * (q(v, 1.0) + q(v, -1.0))))
            .sum(),
        LatentAccess::AudioOnly => signs
            .iter()
            .map(|&a| 0.5 * best(0.5 * (q(1.0, a) + q(-1.0, a))))
            .sum(),
    }
}

/// Monte-Carlo estimate of the Bayes accuracy with access to both signs.
pub fn bayes_ceiling_mc(cfg: &SynthConfig, draws: usize, seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let mut correct = 0usize;
    for _ in 0..draws {
        let s_v = rng.sign();
        let s_a = rng.sign();
        let label = cfg.latent_label(s_v, s_a, rng.normal());
        let guess = if cfg.fraud_probability(s_v, s_a) > 0.5 {
            Label::Fraud
        } else {
            Label::Legit
        };
        correct += usize::from(guess == label);
    }
    correct as f64 / draws as f64
}
