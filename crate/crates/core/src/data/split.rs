use serde::{Deserialize, Serialize};

use super::record::{Dataset, Label};
use crate::error::{Error, Result};
use crate::numkit::Rng;

/// Fold index for every record of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    /// Record indices in fold `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    /// Record indices outside fold `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    pub fn check(&self, ds: &Dataset) -> Result<()> {
        if self.assignments.len() != ds.len() || self.assignments.iter().any(|&f| f >= self.k) {
            return Err(Error::Split(format!(
                "fold plan for {} records with k={} does not fit a dataset of {} records",
                self.assignments.len(),
                self.k,
                ds.len()
            )));
        }
        Ok(())
    }
}

/// Stratified k-fold assignment.
///
/// Each class is shuffled with its own substream and dealt round-robin.
/// The dealing position carries over from one class to the next, so fold
/// sizes differ by at most one as well as per-class counts.
pub fn stratified_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Split(format!("k must be at least 2, got {k}")));
    }
    let rng = Rng::new(seed);
    let mut assignments = vec![0; ds.len()];
    let mut next = 0usize;
    for label in [Label::Legit, Label::Fraud] {
        let mut members: Vec<usize> = (0..ds.len())
            .filter(|&i| ds.records[i].label == label)
            .collect();
        if members.len() < k {
            return Err(Error::Split(format!(
                "class {label} has {} records, fewer than k={k}",
                members.len()
            )));
        }
        rng.fork(label as u64).shuffle(&mut members);
        for i in members {
            assignments[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan { k, assignments })
}

/// Splits `indices` into (kept, held out) with `fraction` of each class held
/// out, rounded, at least one per class.
pub fn stratified_holdout(
    ds: &Dataset,
    indices: &[usize],
    fraction: f64,
    rng: &mut Rng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut kept = Vec::new();
    let mut held = Vec::new();
    for label in [Label::Legit, Label::Fraud] {
        let mut members: Vec<usize> = indices
            .iter()
            .copied()
            .filter(|&i| ds.records[i].label == label)
            .collect();
        if members.len() < 2 {
            return Err(Error::Split(format!(
                "class {label} has {} training records; cannot hold out a validation split",
                members.len()
            )));
        }
        rng.shuffle(&mut members);
        let n = ((members.len() as f64 * fraction).round() as usize).clamp(1, members.len() - 1);
        held.extend_from_slice(&members[..n]);
        kept.extend_from_slice(&members[n..]);
    }
    kept.sort_unstable();
    held.sort_unstable();
    Ok((kept, held))
}
