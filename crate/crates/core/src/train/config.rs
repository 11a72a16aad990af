use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every optimisation hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr_max: f64,
    pub lr_min: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Cosine half-period in epochs; `None` means `max_epochs`.
    pub t_max: Option<usize>,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub dropout_p: f64,
    /// Epochs without a strict validation-F1 improvement before stopping.
    pub patience: usize,
    pub threshold: f64,
    /// Share of each class in a fold's training portion held out for early
    /// stopping.
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr_max: 1e-4,
            lr_min: 0.0,
            batch_size: 8,
            max_epochs: 100,
            t_max: None,
            weight_decay: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            dropout_p: 0.2,
            patience: 10,
            threshold: 0.5,
            val_fraction: 0.15,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn t_max(&self) -> usize {
        self.t_max.unwrap_or(self.max_epochs)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Parameter(m.to_string()));
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("beta1 and beta2 must lie in (0, 1)");
        }
        if !(self.lr_min >= 0.0 && self.lr_min <= self.lr_max && self.lr_max.is_finite()) {
            return bad("need 0 <= lr_min <= lr_max");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.patience == 0 {
            return bad("patience must be at least 1");
        }
        if self.max_epochs == 0 || self.t_max() == 0 {
            return bad("max_epochs and t_max must be at least 1");
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return bad("dropout_p must lie in [0, 1)");
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad("threshold must lie in (0, 1)");
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return bad("val_fraction must lie in (0, 1)");
        }
        if !(self.eps > 0.0 && self.weight_decay >= 0.0) {
            return bad("eps must be positive and weight_decay non-negative");
        }
        Ok(())
    }
}
