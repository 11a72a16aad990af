use std::f64::consts::PI;

use super::TrainConfig;

/// Cosine annealing from `lr_max` at epoch 0 to `lr_min` at `t_max`.
/// Epochs past `t_max` stay at `lr_min`.
pub fn cosine_lr(epoch: usize, cfg: &TrainConfig) -> f64 {
    let t_max = cfg.t_max();
    if epoch >= t_max {
        return cfg.lr_min;
    }
    let phase = PI * epoch as f64 / t_max as f64;
    cfg.lr_min + (cfg.lr_max - cfg.lr_min) * (1.0 + phase.cos()) / 2.0
}
