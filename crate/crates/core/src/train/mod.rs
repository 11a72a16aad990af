//! AdamW with cosine annealing, early stopping on validation F1, and the
//! cross-validation driver.

mod adamw;
mod config;
mod cv;
mod early_stop;
mod history;
mod schedule;
mod trainer;

pub use adamw::{adamw_step, AdamWState};
pub use config::TrainConfig;
pub use cv::{run_cv, CvReport, EvalReport, FoldResult, FoldSummary};
pub use early_stop::EarlyStopState;
pub use history::{EpochRecord, TrainHistory};
pub use schedule::cosine_lr;
pub use trainer::{predict_dataset, train_one, TrainOutcome};
