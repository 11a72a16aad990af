//! Thresholded classification metrics and the variant ablation runner.

mod ablation;
mod metrics;

pub use ablation::{run_ablation, AblationReport, AblationRow};
pub use metrics::{
    confusion, f1_score, metrics, metrics_at, AggregateMetrics, ConfusionMatrix, MetricsReport,
    Summary, DEFAULT_THRESHOLD,
};
