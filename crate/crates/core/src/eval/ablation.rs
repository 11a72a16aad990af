use serde::{Deserialize, Serialize};

use super::{AggregateMetrics, MetricsReport, Summary};
use crate::data::{Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::model::{Dims, ModelVariant};
use crate::train::{run_cv, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: ModelVariant,
    pub label: String,
    pub aggregate: AggregateMetrics,
    pub folds: Vec<MetricsReport>,
}

/// One row per requested variant, in table order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub k: usize,
    pub seed: u64,
    pub threshold: f64,
    pub records: usize,
    pub rows: Vec<AblationRow>,
}

/// Cross-validates every requested variant on the same fold plan.
pub fn run_ablation(
    ds: &Dataset,
    plan: &FoldPlan,
    variants: &[ModelVariant],
    dims: &Dims,
    cfg: &TrainConfig,
) -> Result<AblationReport> {
    if variants.is_empty() {
        return Err(Error::Input("no variants requested".into()));
    }
    let mut ordered = variants.to_vec();
    ordered.sort();
    ordered.dedup();
    let mut rows = Vec::with_capacity(ordered.len());
    for variant in ordered {
        let cv = run_cv::<f64>(ds, plan, variant, dims, cfg)?;
        rows.push(AblationRow {
            variant,
            label: variant.label().to_string(),
            aggregate: cv.aggregate,
            folds: cv.folds.iter().map(|f| f.test).collect(),
        });
    }
    Ok(AblationReport {
        k: plan.k,
        seed: cfg.seed,
        threshold: cfg.threshold,
        records: ds.len(),
        rows,
    })
}

fn pct(s: &Summary) -> String {
    format!("{:5.1} ± {:4.1}", 100.0 * s.mean, 100.0 * s.std)
}

impl AblationReport {
    pub fn row(&self, variant: ModelVariant) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.variant == variant)
    }

    /// Aligned text table, metrics in percent as mean ± std over folds.
    pub fn render_table(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(5)
            .max(5);
        let mut out = format!(
            "{:<width$} | {:^12} | {:^12} | {:^12} | {:^12}\n",
            "Model", "Accuracy %", "Precision %", "Recall %", "F1 %"
        );
        out.push_str(&format!("{}\n", "-".repeat(width + 4 * 15)));
        for r in &self.rows {
            let a = &r.aggregate;
            out.push_str(&format!(
                "{:<width$} | {} | {} | {} | {}\n",
                r.label,
                pct(&a.accuracy),
                pct(&a.precision),
                pct(&a.recall),
                pct(&a.f1)
            ));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "variant,label,acc_mean,acc_std,prec_mean,prec_std,rec_mean,rec_std,f1_mean,f1_std\n",
        );
        for r in &self.rows {
            let a = &r.aggregate;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.variant,
                r.label,
                a.accuracy.mean,
                a.accuracy.std,
                a.precision.mean,
                a.precision.std,
                a.recall.mean,
                a.recall.std,
                a.f1.mean,
                a.f1.std
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
