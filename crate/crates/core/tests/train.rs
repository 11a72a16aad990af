use tfn_core::data::{
    generate_synthetic, stratified_holdout, stratified_kfold, Dataset, SynthConfig,
};
use tfn_core::eval::MetricsReport;
use tfn_core::model::{init_params, Dims, ModelVariant};
use tfn_core::numkit::{splitmix64, Rng};
use tfn_core::train::{cosine_lr, run_cv, train_one, TrainConfig, TrainHistory};

fn small(seed: u64, n_total: usize, n_fraud: usize) -> Dataset {
    generate_synthetic(&SynthConfig {
        n_total,
        n_fraud,
        feature_dim: 96,
        seed,
        ..SynthConfig::default()
    })
    .unwrap()
}

fn split(ds: &Dataset, seed: u64) -> (Dataset, Dataset) {
    let all: Vec<usize> = (0..ds.len()).collect();
    let (kept, held) = stratified_holdout(ds, &all, 0.25, &mut Rng::new(seed)).unwrap();
    (ds.subset(&kept), ds.subset(&held))
}

fn assert_lr_trace(history: &TrainHistory, cfg: &TrainConfig) {
    for (i, e) in history.epochs.iter().enumerate() {
        assert_eq!(e.epoch, i + 1);
        assert_eq!(e.lr, cosine_lr(i, cfg));
    }
}

#[test]
fn zero_learning_rate_freezes_parameters_and_stops_after_patience() {
    let ds = small(3, 48, 20);
    let (train, val) = split(&ds, 3);
    let dims = Dims::scaled(8);
    let cfg = TrainConfig {
        lr_max: 0.0,
        weight_decay: 0.0,
        patience: 1,
        max_epochs: 10,
        seed: 11,
        ..TrainConfig::default()
    };
    let out = train_one::<f64>(ModelVariant::TfComplete, &dims, &train, &val, &cfg).unwrap();
    let init = init_params::<f64>(ModelVariant::TfComplete, &dims, splitmix64(cfg.seed));
    assert_eq!(out.best_params.to_flat(), init.to_flat());
    assert_eq!(out.history.epochs.len(), 2);
    assert_eq!(out.best_epoch, 1);
    let vals: Vec<MetricsReport> = out.history.epochs.iter().map(|e| e.val).collect();
    assert_eq!(vals[0], vals[1]);
    assert_eq!(
        out.history.epochs[0].val_loss,
        out.history.epochs[1].val_loss
    );
}

#[test]
fn strong_signal_toy_loss_decreases() {
    let ds = generate_synthetic(&SynthConfig {
        n_total: 64,
        n_fraud: 32,
        a: 0.0,
        b: 0.0,
        c: 3.0,
        sigma: 0.1,
        feature_dim: 96,
        seed: 5,
        ..SynthConfig::default()
    })
    .unwrap();
    let (train, val) = split(&ds, 5);
    let cfg = TrainConfig {
        seed: 5,
        patience: 100,
        max_epochs: 30,
        ..TrainConfig::default()
    };
    let out = train_one::<f64>(
        ModelVariant::TfComplete,
        &Dims::scaled(8),
        &train,
        &val,
        &cfg,
    )
    .unwrap();
    let losses: Vec<f64> = out.history.epochs.iter().map(|e| e.train_loss).collect();
    for w in losses[..5].windows(2) {
        assert!(w[1] < w[0], "loss rose in the first epochs: {losses:?}");
    }
    assert!(losses[losses.len() - 1] < losses[0], "{losses:?}");
    assert_lr_trace(&out.history, &cfg);
}

#[test]
fn best_epoch_never_follows_the_last_improvement() {
    let ds = small(8, 60, 24);
    let (train, val) = split(&ds, 8);
    let cfg = TrainConfig {
        lr_max: 1e-3,
        patience: 3,
        max_epochs: 25,
        seed: 8,
        ..TrainConfig::default()
    };
    let out = train_one::<f64>(
        ModelVariant::EarlyFusion,
        &Dims::scaled(8),
        &train,
        &val,
        &cfg,
    )
    .unwrap();
    let h = &out.history.epochs;
    let best = h.iter().map(|e| e.val.f1).fold(f64::NEG_INFINITY, f64::max);
    let first_best = h.iter().find(|e| e.val.f1 == best).unwrap().epoch;
    assert_eq!(out.best_epoch, first_best);
    assert!(h.len() == cfg.max_epochs || h.len() - out.best_epoch == cfg.patience);
    assert_lr_trace(&out.history, &cfg);
}

#[test]
fn history_csv_has_one_row_per_epoch() {
    let ds = small(2, 40, 16);
    let (train, val) = split(&ds, 2);
    let cfg = TrainConfig {
        max_epochs: 4,
        ..TrainConfig::default()
    };
    let out = train_one::<f64>(
        ModelVariant::AudioOnly,
        &Dims::scaled(8),
        &train,
        &val,
        &cfg,
    )
    .unwrap();
    let csv = out.history.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "epoch,lr,train_loss,val_loss,val_acc,val_prec,val_rec,val_f1"
    );
    assert_eq!(lines.len(), 1 + out.history.epochs.len());
    assert!(lines[1].starts_with("1,0.0001,"));
}

#[test]
fn wrong_feature_width_is_rejected() {
    let ds = small(1, 20, 8);
    let err = train_one::<f64>(
        ModelVariant::VideoOnly,
        &Dims::FULL,
        &ds,
        &ds,
        &TrainConfig::default(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("768"));
}

#[test]
fn cross_validation_is_deterministic_and_aggregates_fold_means() {
    let ds = small(4, 50, 20);
    let plan = stratified_kfold(&ds, 5, 4).unwrap();
    let cfg = TrainConfig {
        max_epochs: 3,
        seed: 4,
        ..TrainConfig::default()
    };
    let dims = Dims::scaled(8);
    let a = run_cv::<f64>(&ds, &plan, ModelVariant::LateFusion, &dims, &cfg).unwrap();
    let b = run_cv::<f64>(&ds, &plan, ModelVariant::LateFusion, &dims, &cfg).unwrap();
    assert_eq!(a.eval_report(), b.eval_report());
    for (fa, fb) in a.folds.iter().zip(&b.folds) {
        assert_eq!(fa.params.to_flat(), fb.params.to_flat());
    }
    assert_eq!(a.folds.len(), 5);
    let f1s: Vec<f64> = a.folds.iter().map(|f| f.test.f1).collect();
    let mean = f1s.iter().sum::<f64>() / 5.0;
    assert!((a.aggregate.f1.mean - mean).abs() < 1e-15);
    for f in &a.folds {
        assert_eq!(f.test_size, 10);
        assert_eq!(f.train_size + f.val_size, 40);
        assert_eq!(f.test.cm.total(), 10);
    }
}

#[test]
fn variants_share_folds_and_validation_holdouts() {
    let ds = small(6, 50, 20);
    let plan = stratified_kfold(&ds, 5, 6).unwrap();
    let cfg = TrainConfig {
        max_epochs: 1,
        seed: 6,
        ..TrainConfig::default()
    };
    let dims = Dims::scaled(8);
    let v = run_cv::<f64>(&ds, &plan, ModelVariant::VideoOnly, &dims, &cfg).unwrap();
    let t = run_cv::<f64>(&ds, &plan, ModelVariant::TfComplete, &dims, &cfg).unwrap();
    for (a, b) in v.folds.iter().zip(&t.folds) {
        assert_eq!(
            (a.train_size, a.val_size, a.test_size),
            (b.train_size, b.val_size, b.test_size)
        );
        assert_eq!(a.test.cm.tp + a.test.cm.fn_, b.test.cm.tp + b.test.cm.fn_);
    }
}
