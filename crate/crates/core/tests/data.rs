use proptest::prelude::*;
use tfn_core::data::{
    decode_binary, decode_jsonl, encode_binary, encode_jsonl, generate_synthetic, load_dataset,
    save_dataset, stratified_kfold, DataFormat, Dataset, FeatureRecord, Label, SynthConfig,
};
use tfn_core::Vector;

fn default_set() -> Dataset {
    generate_synthetic(&SynthConfig::default()).unwrap()
}

#[test]
fn default_generator_meets_quotas() {
    let ds = default_set();
    assert_eq!(ds.len(), 820);
    assert_eq!(ds.count(Label::Fraud), 356);
    assert_eq!(ds.count(Label::Legit), 464);
    assert_eq!(ds.feature_dim(), 768);
    assert!(ds.provenance.starts_with("synthetic: "));
}

#[test]
fn generator_is_deterministic_in_seed() {
    let cfg = SynthConfig {
        n_total: 30,
        n_fraud: 12,
        seed: 9,
        ..SynthConfig::default()
    };
    assert_eq!(
        generate_synthetic(&cfg).unwrap(),
        generate_synthetic(&cfg).unwrap()
    );
    let other = generate_synthetic(&SynthConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(generate_synthetic(&cfg).unwrap().records, other.records);
}

#[test]
fn signal_lives_in_the_leading_coordinates() {
    // The mean of a signal coordinate splits by latent sign; noise coordinates stay centred.
    let ds = default_set();
    let n = ds.len() as f64;
    let mean_abs = |k: usize| ds.records.iter().map(|r| r.video[k].abs()).sum::<f64>() / n;
    let signal: f64 = (0..16).map(mean_abs).sum::<f64>() / 16.0;
    let noise: f64 = (16..768).map(mean_abs).sum::<f64>() / 752.0;
    // E|N(±1,1)| ≈ 1.1666, E|N(0,1)| = sqrt(2/π) ≈ 0.7979
    assert!((signal - 1.1666).abs() < 0.03, "{signal}");
    assert!((noise - 0.7979).abs() < 0.01, "{noise}");
}

#[test]
fn default_folds_are_balanced() {
    let ds = default_set();
    for seed in 0..5 {
        let plan = stratified_kfold(&ds, 5, seed).unwrap();
        assert_eq!(plan.fold_sizes(), vec![164; 5]);
        for f in 0..5 {
            let fraud = plan
                .test_indices(f)
                .iter()
                .filter(|&&i| ds.records[i].label.is_fraud())
                .count();
            assert!(fraud == 71 || fraud == 72, "fold {f} has {fraud} fraud");
        }
    }
}

#[test]
fn binary_size_and_file_round_trip() {
    let ds = default_set();
    let bytes = encode_binary(&ds).unwrap();
    // header: magic, version, count; per record: id length, 8-char id, 1536 f64, label; checksum
    assert_eq!(bytes.len(), 9 + 820 * (2 + 8 + 1536 * 8 + 1) + 8);
    let back = decode_binary(&bytes).unwrap();
    assert_eq!(back.records, ds.records);

    let dir = tempfile::tempdir().unwrap();
    for (name, format) in [
        ("d.bin", DataFormat::Binary),
        ("d.jsonl", DataFormat::Jsonl),
    ] {
        let path = dir.path().join(name);
        save_dataset(&ds, &path, format).unwrap();
        assert_eq!(load_dataset(&path).unwrap().records, ds.records);
    }
}

#[test]
fn any_flipped_byte_is_rejected() {
    let ds = generate_synthetic(&SynthConfig {
        n_total: 4,
        n_fraud: 2,
        ..SynthConfig::default()
    })
    .unwrap();
    let bytes = encode_binary(&ds).unwrap();
    for pos in [
        0,
        4,
        6,
        9,
        100,
        bytes.len() / 2,
        bytes.len() - 9,
        bytes.len() - 1,
    ] {
        let mut bad = bytes.clone();
        bad[pos] ^= 0x01;
        assert!(decode_binary(&bad).is_err(), "flip at {pos} accepted");
    }
}

#[test]
fn jsonl_skips_blank_lines() {
    let ds = generate_synthetic(&SynthConfig {
        n_total: 3,
        n_fraud: 1,
        feature_dim: 4,
        d_sig: 2,
        ..SynthConfig::default()
    })
    .unwrap();
    let text = String::from_utf8(encode_jsonl(&ds).unwrap())
        .unwrap()
        .replace('\n', "\n\n");
    assert_eq!(decode_jsonl(&text).unwrap().records, ds.records);
}

#[test]
fn duplicate_ids_are_rejected() {
    let r = FeatureRecord {
        id: "x".into(),
        video: Vector::zeros(2),
        audio: Vector::zeros(2),
        label: Label::Legit,
    };
    assert!(Dataset::new(vec![r.clone(), r], "t").is_err());
}

fn toy(legit: usize, fraud: usize) -> Dataset {
    let records = (0..legit + fraud)
        .map(|i| FeatureRecord {
            id: format!("r{i}"),
            video: Vector::zeros(1),
            audio: Vector::zeros(1),
            label: if i < fraud {
                Label::Fraud
            } else {
                Label::Legit
            },
        })
        .collect();
    Dataset::new(records, "toy").unwrap()
}

proptest! {
    #[test]
    fn folds_partition_and_stratify(legit in 5usize..60, fraud in 5usize..60, k in 2usize..6, seed in any::<u64>()) {
        let ds = toy(legit, fraud);
        let (nl, nf) = (legit, fraud);
        let plan = stratified_kfold(&ds, k, seed).unwrap();
        let mut seen = vec![false; ds.len()];
        for f in 0..k {
            let test = plan.test_indices(f);
            let train = plan.train_indices(f);
            prop_assert_eq!(test.len() + train.len(), ds.len());
            for &i in &test {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
            let fraud_in = test.iter().filter(|&&i| ds.records[i].label.is_fraud()).count();
            let lo = nf / k;
            prop_assert!(fraud_in == lo || fraud_in == lo + 1);
            let legit_in = test.len() - fraud_in;
            prop_assert!(legit_in == nl / k || legit_in == nl / k + 1);
        }
        prop_assert!(seen.iter().all(|&s| s));
        let sizes = plan.fold_sizes();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn quotas_hold_for_any_seed(seed in any::<u64>(), n_fraud in 1usize..19) {
        let cfg = SynthConfig { n_total: 20, n_fraud, feature_dim: 8, d_sig: 4, seed, ..SynthConfig::default() };
        let ds = generate_synthetic(&cfg).unwrap();
        prop_assert_eq!(ds.count(Label::Fraud), n_fraud);
        prop_assert_eq!(ds.len(), 20);
    }
}
