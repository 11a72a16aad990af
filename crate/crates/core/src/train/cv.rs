use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{predict_dataset, train_one, TrainConfig, TrainHistory};
use crate::data::{stratified_holdout, Dataset, FoldPlan};
use crate::error::Result;
use crate::eval::{confusion, metrics_at, AggregateMetrics, MetricsReport};
use crate::model::{Dims, ModelParams, ModelVariant};
use crate::numkit::{Rng, Scalar};

#[derive(Debug, Clone)]
pub struct FoldResult<T> {
    pub fold: usize,
    pub params: ModelParams<T>,
    pub history: TrainHistory,
    pub best_epoch: usize,
    pub test: MetricsReport,
    pub train_size: usize,
    pub val_size: usize,
    pub test_size: usize,
}

#[derive(Debug, Clone)]
pub struct CvReport<T> {
    pub variant: ModelVariant,
    pub folds: Vec<FoldResult<T>>,
    pub aggregate: AggregateMetrics,
}

/// Serializable summary of a cross-validation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub variant: ModelVariant,
    pub folds: Vec<FoldSummary>,
    pub aggregate: AggregateMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold: usize,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub train_size: usize,
    pub val_size: usize,
    pub test_size: usize,
    pub test: MetricsReport,
}

impl<T> CvReport<T> {
    pub fn eval_report(&self) -> EvalReport {
        EvalReport {
            variant: self.variant,
            folds: self
                .folds
                .iter()
                .map(|f| FoldSummary {
                    fold: f.fold,
                    best_epoch: f.best_epoch,
                    epochs_run: f.history.epochs.len(),
                    train_size: f.train_size,
                    val_size: f.val_size,
                    test_size: f.test_size,
                    test: f.test,
                })
                .collect(),
            aggregate: self.aggregate,
        }
    }
}

/// Seeds for one fold: the validation holdout depends on the fold only, the
/// training stream on the fold and the variant.
fn fold_streams(seed: u64, fold: usize, variant: ModelVariant) -> (Rng, u64) {
    let fold_rng = Rng::new(seed).fork(fold as u64);
    let holdout = fold_rng.fork(0);
    let train_seed = fold_rng.fork(1 + variant.tag() as u64).seed();
    (holdout, train_seed)
}

/// Stratified k-fold cross-validation of one variant.
///
/// Fold `i` trains on every other fold minus a stratified validation
/// holdout and is scored on fold `i`. Folds run in parallel; each uses its
/// own substreams, so the result does not depend on scheduling.
pub fn run_cv<T: Scalar>(
    ds: &Dataset,
    plan: &FoldPlan,
    variant: ModelVariant,
    dims: &Dims,
    cfg: &TrainConfig,
) -> Result<CvReport<T>> {
    cfg.validate()?;
    plan.check(ds)?;
    let folds = (0..plan.k)
        .into_par_iter()
        .map(|fold| run_fold(ds, plan, fold, variant, dims, cfg))
        .collect::<Result<Vec<_>>>()?;
    let tests: Vec<MetricsReport> = folds.iter().map(|f| f.test).collect();
    Ok(CvReport {
        variant,
        aggregate: AggregateMetrics::of(&tests),
        folds,
    })
}

fn run_fold<T: Scalar>(
    ds: &Dataset,
    plan: &FoldPlan,
    fold: usize,
    variant: ModelVariant,
    dims: &Dims,
    cfg: &TrainConfig,
) -> Result<FoldResult<T>> {
    let (mut holdout_rng, train_seed) = fold_streams(cfg.seed, fold, variant);
    let (train_idx, val_idx) = stratified_holdout(
        ds,
        &plan.train_indices(fold),
        cfg.val_fraction,
        &mut holdout_rng,
    )?;
    let test_idx = plan.test_indices(fold);
    let (train, val, test) = (
        ds.subset(&train_idx),
        ds.subset(&val_idx),
        ds.subset(&test_idx),
    );
    let fold_cfg = TrainConfig {
        seed: train_seed,
        ..cfg.clone()
    };
    let outcome = train_one::<T>(variant, dims, &train, &val, &fold_cfg)?;
    let probs = predict_dataset(&outcome.best_params, &test)?;
    let cm = confusion(&probs, &test.labels(), cfg.threshold)?;
    Ok(FoldResult {
        fold,
        params: outcome.best_params,
        history: outcome.history,
        best_epoch: outcome.best_epoch,
        test: metrics_at(&cm, cfg.threshold)?,
        train_size: train.len(),
        val_size: val.len(),
        test_size: test.len(),
    })
}
