use log::warn;

use super::{
    adamw_step, cosine_lr, AdamWState, EarlyStopState, EpochRecord, TrainConfig, TrainHistory,
};
use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::eval::{confusion, metrics_at};
use crate::model::{
    accumulate_backward, init_params, model_forward, predict, Dims, ModelParams, ModelVariant,
};
use crate::numkit::{bce_loss, splitmix64, Rng, Scalar, Vector};

/// Training examples converted once to the model's scalar type.
struct Prepared<T> {
    video: Vec<Vector<T>>,
    audio: Vec<Vector<T>>,
    labels: Vec<Label>,
}

impl<T: Scalar> Prepared<T> {
    fn new(ds: &Dataset) -> Self {
        Self {
            video: ds
                .records
                .iter()
                .map(|r| Vector::from_f64(r.video.as_slice()))
                .collect(),
            audio: ds
                .records
                .iter()
                .map(|r| Vector::from_f64(r.audio.as_slice()))
                .collect(),
            labels: ds.labels(),
        }
    }

    fn len(&self) -> usize {
        self.labels.len()
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    /// Parameters from the epoch with the best validation F1.
    pub best_params: ModelParams<T>,
    pub best_epoch: usize,
    pub history: TrainHistory,
}

/// Trains one variant from scratch, keeping the checkpoint with the best
/// validation F1.
///
/// Each epoch shuffles the training set, steps AdamW once per minibatch at
/// the epoch's cosine learning rate, then scores the validation set with
/// dropout off. Training stops after `patience` epochs without a strict F1
/// improvement or at `max_epochs`.
pub fn train_one<T: Scalar>(
    variant: ModelVariant,
    dims: &Dims,
    train: &Dataset,
    val: &Dataset,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::Input(
            "training and validation sets must be non-empty".into(),
        ));
    }
    for ds in [train, val] {
        if ds.feature_dim() != dims.input {
            return Err(Error::dim(format!(
                "model expects {} features per modality, dataset has {}",
                dims.input,
                ds.feature_dim()
            )));
        }
    }
    let root = Rng::new(cfg.seed);
    let mut params: ModelParams<T> = init_params(variant, dims, splitmix64(cfg.seed));
    params.set_dropout(cfg.dropout_p);
    let mut shuffle_rng = root.fork(1);
    let mut dropout_rng = root.fork(2);

    let train_set = Prepared::<T>::new(train);
    let val_set = Prepared::<T>::new(val);
    let single_class_val = val_set.labels.iter().all(|&l| l == val_set.labels[0]);
    if single_class_val {
        warn!("validation split holds a single class; F1 is degenerate");
    }

    let mut state = AdamWState::new(&params);
    let mut grads = params.zeros_like();
    let mut stop = EarlyStopState::new();
    let mut history = TrainHistory::default();
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    for epoch_index in 0..cfg.max_epochs {
        let lr = cosine_lr(epoch_index, cfg);
        shuffle_rng.shuffle(&mut order);
        for batch in order.chunks(cfg.batch_size) {
            grads.set_zero();
            let scale = T::of(1.0 / batch.len() as f64);
            for &i in batch {
                let y = T::of(train_set.labels[i].as_f64());
                let (_, trace) = model_forward(
                    &params,
                    &train_set.video[i],
                    &train_set.audio[i],
                    true,
                    &mut dropout_rng,
                )?;
                accumulate_backward(&params, &trace, y, scale, &mut grads)?;
            }
            adamw_step(&mut params, &grads, &mut state, lr, cfg)?;
        }
        // Scored with dropout off so the curve tracks the objective, not mask noise.
        let (train_loss, _) = evaluate(&params, &train_set)?;

        let (val_loss, probs) = evaluate(&params, &val_set)?;
        let cm = confusion(&probs, &val_set.labels, cfg.threshold)?;
        let report = metrics_at(&cm, cfg.threshold)?;
        let epoch = epoch_index + 1;
        stop.update(report.f1, epoch, &params);
        history.epochs.push(EpochRecord {
            epoch,
            lr,
            train_loss,
            val_loss,
            val: report,
            single_class_val,
        });
        if stop.should_stop(cfg.patience) {
            break;
        }
    }
    Ok(TrainOutcome {
        best_params: stop.best_checkpoint.expect("at least one epoch ran"),
        best_epoch: stop.best_epoch,
        history,
    })
}

fn evaluate<T: Scalar>(params: &ModelParams<T>, set: &Prepared<T>) -> Result<(f64, Vec<f64>)> {
    let mut loss = 0.0;
    let mut probs = Vec::with_capacity(set.len());
    for i in 0..set.len() {
        let p = predict(params, &set.video[i], &set.audio[i])?;
        loss += bce_loss(p, T::of(set.labels[i].as_f64())).as_f64();
        probs.push(p.as_f64());
    }
    Ok((loss / set.len() as f64, probs))
}

/// Inference-mode probabilities for every record of `ds`.
pub fn predict_dataset<T: Scalar>(params: &ModelParams<T>, ds: &Dataset) -> Result<Vec<f64>> {
    Ok(evaluate(params, &Prepared::new(ds))?.1)
}
