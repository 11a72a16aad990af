use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use tfn_core::data::{
    generate_synthetic, load_dataset, save_dataset, DataFormat, Label, SynthConfig,
};
use tfn_core::model::{init_params, save_params, Dims, ModelVariant};
use tfn_core::Params;

const TFN: &str = env!("CARGO_BIN_EXE_tfn");

fn tfn(args: &[&str]) -> Output {
    Command::new(TFN).args(args).output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8(bytes.to_vec()).unwrap()
}

fn zero_checkpoint(path: &Path) {
    let mut p: Params = init_params(ModelVariant::TfComplete, &Dims::FULL, 0);
    let n = p.num_params();
    p.set_flat(&vec![0.0; n]).unwrap();
    save_params(&p, path).unwrap();
}

fn record_json(id: &str, len: usize) -> String {
    let v: Vec<f64> = (0..len).map(|i| (i as f64 * 0.37).sin()).collect();
    serde_json::json!({"id": id, "video": v, "audio": v}).to_string()
}

#[test]
fn gen_data_defaults_and_guards() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.bin");
    let o = tfn(&["gen-data", "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    let ds = load_dataset(&out).unwrap();
    assert_eq!((ds.len(), ds.count(Label::Fraud)), (820, 356));
    assert!(text(&o.stdout).contains("fraud: 356"));

    let small = dir.path().join("small");
    let o = tfn(&[
        "gen-data",
        "--n-total",
        "10",
        "--n-fraud",
        "5",
        "--format",
        "jsonl",
        "--out-dir",
        small.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let ds = load_dataset(small.join("dataset.jsonl")).unwrap();
    assert_eq!((ds.len(), ds.count(Label::Fraud)), (10, 5));
    assert!(small.join("resolved_config.txt").exists());

    let o = tfn(&[
        "gen-data",
        "--n-fraud",
        "0",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn train_writes_artifacts_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = tfn(&[
            "train",
            "--variant",
            "tf-complete",
            "--seed",
            "3",
            "--out-dir",
            out.to_str().unwrap(),
            "--set",
            "n_total=30",
            "--set",
            "n_fraud=12",
            "--set",
            "max_epochs=2",
        ]);
        assert!(o.status.success(), "{}", text(&o.stderr));
        out
    };
    let a = run("a");
    for f in 0..5 {
        assert!(a.join(format!("fold_{f}.ckpt")).exists());
        let csv = fs::read_to_string(a.join(format!("fold_{f}_history.csv"))).unwrap();
        assert!(csv.starts_with("epoch,lr,"));
    }
    let b = run("b");
    let report = fs::read(a.join("report.json")).unwrap();
    assert_eq!(report, fs::read(b.join("report.json")).unwrap());
    assert_eq!(
        fs::read(a.join("fold_0.ckpt")).unwrap(),
        fs::read(b.join("fold_0.ckpt")).unwrap()
    );
    let json: serde_json::Value = serde_json::from_slice(&report).unwrap();
    assert_eq!(json["variant"], "tf-complete");
    assert_eq!(json["folds"].as_array().unwrap().len(), 5);
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = tfn(&[
        "train",
        "--variant",
        "late-fusion",
        "--seed",
        "21",
        "--out-dir",
        first.to_str().unwrap(),
        "--set",
        "n_total=25",
        "--set",
        "n_fraud=10",
        "--set",
        "max_epochs=1",
        "--set",
        "lr_max=0.001",
    ]);
    assert!(o.status.success());
    let echoed = first.join("resolved_config.txt");
    let second = dir.path().join("second");
    let o = tfn(&[
        "train",
        "--config",
        echoed.to_str().unwrap(),
        "--out-dir",
        second.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert_eq!(
        fs::read(first.join("report.json")).unwrap(),
        fs::read(second.join("report.json")).unwrap()
    );
    let a = fs::read_to_string(echoed).unwrap();
    let b = fs::read_to_string(second.join("resolved_config.txt")).unwrap();
    assert_eq!(
        a.replace(first.to_str().unwrap(), ""),
        b.replace(second.to_str().unwrap(), "")
    );
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small run\nn_total = 12\nn_fraud = 6\nseed = 1\n").unwrap();
    let out = dir.path().join("o");
    let o = tfn(&[
        "gen-data",
        "--config",
        cfg.to_str().unwrap(),
        "--n-fraud",
        "4",
        "--seed",
        "2",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let echoed = fs::read_to_string(out.join("resolved_config.txt")).unwrap();
    for line in ["n_total = 12", "n_fraud = 4", "seed = 2"] {
        assert!(echoed.lines().any(|l| l == line), "missing {line}");
    }
    fs::write(&cfg, "nonsense = 1\n").unwrap();
    let o = tfn(&[
        "gen-data",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("unknown config key"));
}

#[test]
fn unknown_variant_lists_all_names() {
    let o = tfn(&["train", "--variant", "unknown-name"]);
    assert_eq!(o.status.code(), Some(1));
    let err = text(&o.stderr);
    for v in ModelVariant::ALL {
        assert!(err.contains(v.name()), "{err}");
    }
}

#[test]
fn ablate_subset_renders_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    let ds = generate_synthetic(&SynthConfig {
        n_total: 30,
        n_fraud: 12,
        seed: 4,
        ..SynthConfig::default()
    })
    .unwrap();
    save_dataset(&ds, &data, DataFormat::Jsonl).unwrap();
    let out = dir.path().join("o");
    let o = tfn(&[
        "ablate",
        "--data",
        data.to_str().unwrap(),
        "--variants",
        "tf-complete,early-fusion",
        "--folds",
        "3",
        "--out-dir",
        out.to_str().unwrap(),
        "--set",
        "max_epochs=1",
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let table = text(&o.stdout);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("Early Fusion ") && lines[3].starts_with("Complete TF"));
    assert_eq!(fs::read_to_string(out.join("ablation.txt")).unwrap(), table);
    assert_eq!(
        fs::read_to_string(out.join("ablation.csv"))
            .unwrap()
            .lines()
            .count(),
        3
    );
}

#[test]
fn infer_zero_checkpoint_and_bad_lines() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("zero.ckpt");
    zero_checkpoint(&ckpt);
    let input = dir.path().join("in.jsonl");
    fs::write(
        &input,
        format!(
            "{}\n\n{}\n{}\n{{oops\n",
            record_json("a", 768),
            record_json("a", 768),
            record_json("short", 767)
        ),
    )
    .unwrap();
    let o = tfn(&[
        "infer",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--input",
        input.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let out = text(&o.stdout);
    let rows: Vec<serde_json::Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["probability"], 0.5);
    assert_eq!(rows[0]["label"], "fraud");
    assert_eq!(rows[0]["probability"], rows[1]["probability"]);
    let err = text(&o.stderr);
    assert!(err.contains("line 4") && err.contains("767"), "{err}");
    assert!(err.contains("line 5"));

    let o = tfn(&[
        "infer",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--threshold",
        "0.6",
        "--record",
        &record_json("r", 768),
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        (v["id"].as_str(), v["label"].as_str()),
        (Some("r"), Some("legit"))
    );

    let o = tfn(&[
        "infer",
        "--checkpoint",
        dir.path().join("missing").to_str().unwrap(),
        "--record",
        "{}",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn serve_stdio_answers_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("m.ckpt");
    let dims = Dims {
        input: 8,
        ..Dims::scaled(8)
    };
    save_params(
        &init_params::<f64>(ModelVariant::EarlyFusion, &dims, 1),
        &ckpt,
    )
    .unwrap();
    let mut child = Command::new(TFN)
        .args(["serve", "--checkpoint", ckpt.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    let writer = std::thread::spawn(move || {
        for i in 0..1000 {
            writeln!(stdin, "{}", record_json(&format!("r{i}"), 8)).unwrap();
            if i == 500 {
                writeln!(stdin).unwrap();
                writeln!(stdin, "not json").unwrap();
            }
        }
    });
    let out = child.wait_with_output().unwrap();
    writer.join().unwrap();
    assert!(out.status.success());
    let lines: Vec<serde_json::Value> = text(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 1001);
    assert!(lines[501]["error"].is_string());
    let ids: Vec<&str> = lines.iter().filter_map(|l| l["id"].as_str()).collect();
    let want: Vec<String> = (0..1000).map(|i| format!("r{i}")).collect();
    assert_eq!(ids, want);
    let stderr = text(&out.stderr);
    let summary = stderr
        .lines()
        .find_map(|l| l.strip_prefix("latency summary "))
        .unwrap();
    let summary: serde_json::Value = serde_json::from_str(summary).unwrap();
    assert_eq!(summary["count"], 1000);
    assert_eq!(summary["errors"], 1);
    for kind in ["forward_ms", "end_to_end_ms"] {
        let s = |k: &str| summary[kind][k].as_f64().unwrap();
        assert!(0.0 <= s("p50") && s("p50") <= s("p95") && s("p95") <= s("max"));
        assert!(s("mean") <= s("max"));
    }
}

#[test]
fn serve_tcp_handles_a_connection() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("m.ckpt");
    let dims = Dims {
        input: 8,
        ..Dims::scaled(8)
    };
    save_params(
        &init_params::<f64>(ModelVariant::LateFusion, &dims, 2),
        &ckpt,
    )
    .unwrap();
    let mut child = Command::new(TFN)
        .args([
            "serve",
            "--transport",
            "tcp:0",
            "--max-connections",
            "1",
            "--checkpoint",
            ckpt.to_str().unwrap(),
        ])
        .stderr(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let mut stderr = BufReader::new(child.stderr.take().unwrap());
    let mut first = String::new();
    stderr.read_line(&mut first).unwrap();
    let addr = first
        .trim()
        .strip_prefix("listening on ")
        .unwrap()
        .to_string();
    let mut conn = TcpStream::connect(addr).unwrap();
    writeln!(conn, "{}\n{}", record_json("x", 8), record_json("y", 9)).unwrap();
    conn.shutdown(std::net::Shutdown::Write).unwrap();
    let replies: Vec<serde_json::Value> = BufReader::new(conn)
        .lines()
        .map(|l| serde_json::from_str(&l.unwrap()).unwrap())
        .collect();
    assert_eq!(replies.len(), 2);
    assert_eq!(replies[0]["id"], "x");
    assert!(replies[1]["error"].as_str().unwrap().contains('9'));
    assert!(child.wait().unwrap().success());
    let mut rest = String::new();
    std::io::Read::read_to_string(&mut stderr, &mut rest).unwrap();
    assert!(rest.contains("\"count\":1"));
}

#[test]
fn serve_rejects_bad_transport() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("z.ckpt");
    zero_checkpoint(&ckpt);
    let o = tfn(&[
        "serve",
        "--transport",
        "pipe",
        "--checkpoint",
        ckpt.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gradcheck_lists_every_variant_and_detects_corruption() {
    let o = tfn(&["gradcheck"]);
    assert!(o.status.success());
    let out = text(&o.stdout);
    assert_eq!(out.lines().count(), 8);
    assert!(out.lines().all(|l| l.ends_with("ok")));
    let o = tfn(&["gradcheck", "--corrupt-backward"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stdout).contains("FAIL"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(tfn(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(tfn(&["gen-data", "--set", "nokey"]).status.code(), Some(1));
    assert!(tfn(&["--help"]).status.success());
}
