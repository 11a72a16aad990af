use serde::{Deserialize, Serialize};

use crate::eval::MetricsReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub lr: f64,
    /// Mean BCE over the training split after the epoch, dropout off.
    pub train_loss: f64,
    pub val_loss: f64,
    pub val: MetricsReport,
    /// Validation set held a single class, so F1 is degenerate.
    pub single_class_val: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
}

impl TrainHistory {
    pub const CSV_HEADER: &'static str =
        "epoch,lr,train_loss,val_loss,val_acc,val_prec,val_rec,val_f1";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                e.epoch,
                e.lr,
                e.train_loss,
                e.val_loss,
                e.val.accuracy,
                e.val.precision,
                e.val.recall,
                e.val.f1
            ));
        }
        out
    }
}
