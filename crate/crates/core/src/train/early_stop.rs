/// Tracks the best validation score and a snapshot of the parameters that
/// achieved it.
#[derive(Debug, Clone)]
pub struct EarlyStopState<P> {
    pub best_metric: f64,
    /// 1-based epoch of the best score; 0 before the first update.
    pub best_epoch: usize,
    pub epochs_since_improve: usize,
    pub best_checkpoint: Option<P>,
}

impl<P: Clone> EarlyStopState<P> {
    pub fn new() -> Self {
        Self {
            best_metric: f64::NEG_INFINITY,
            best_epoch: 0,
            epochs_since_improve: 0,
            best_checkpoint: None,
        }
    }

    /// Records the score for `epoch`. Only a strictly better score replaces
    /// the checkpoint. Returns whether it improved.
    pub fn update(&mut self, metric: f64, epoch: usize, params: &P) -> bool {
        if metric > self.best_metric {
            self.best_metric = metric;
            self.best_epoch = epoch;
            self.epochs_since_improve = 0;
            self.best_checkpoint = Some(params.clone());
            true
        } else {
            self.epochs_since_improve += 1;
            false
        }
    }

    pub fn should_stop(&self, patience: usize) -> bool {
        self.epochs_since_improve >= patience
    }
}

impl<P: Clone> Default for EarlyStopState<P> {
    fn default() -> Self {
        Self::new()
    }
}
