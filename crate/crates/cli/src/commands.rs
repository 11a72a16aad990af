use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use tfn_core::data::{
    bayes_accuracy, generate_synthetic, load_dataset, save_dataset, stratified_kfold, DataFormat,
    Dataset, Label, LatentAccess, DEFAULT_BAYES_CEILING,
};
use tfn_core::eval::run_ablation;
use tfn_core::model::{gradcheck_variant, load_params, save_params, Dims, ModelVariant};
use tfn_core::train::run_cv;
use tfn_core::Real;

use crate::config::AppConfig;
use crate::error::{CliError, CliResult, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
use crate::protocol::handle_line;
use crate::serve::{serve, Transport};

pub const GRADCHECK_TOLERANCE: f64 = 1e-5;
pub const GRADCHECK_SEED: u64 = 0;

fn dataset_for(cfg: &AppConfig) -> CliResult<Dataset> {
    match &cfg.data {
        Some(path) => Ok(load_dataset(path)?),
        None => Ok(generate_synthetic(&cfg.synth)?),
    }
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, bytes)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

pub fn gen_data(cfg: &AppConfig, output: Option<PathBuf>) -> CliResult<i32> {
    cfg.synth.validate()?;
    let ds = generate_synthetic(&cfg.synth)?;
    let ext = match cfg.format {
        DataFormat::Binary => "bin",
        DataFormat::Jsonl => "jsonl",
    };
    let path = output.unwrap_or_else(|| cfg.out_dir.join(format!("dataset.{ext}")));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    save_dataset(&ds, &path, cfg.format)?;
    cfg.echo()?;
    println!("wrote {} records to {}", ds.len(), path.display());
    println!(
        "fraud: {}  legit: {}",
        ds.count(Label::Fraud),
        ds.count(Label::Legit)
    );
    println!("bayes ceiling (committed, default generator): {DEFAULT_BAYES_CEILING:.4}");
    println!(
        "bayes accuracy for this config: both latents {:.4}, video only {:.4}, audio only {:.4}",
        bayes_accuracy(&cfg.synth, LatentAccess::Both),
        bayes_accuracy(&cfg.synth, LatentAccess::VideoOnly),
        bayes_accuracy(&cfg.synth, LatentAccess::AudioOnly)
    );
    Ok(EXIT_OK)
}

pub fn train(cfg: &AppConfig) -> CliResult<i32> {
    cfg.validate()?;
    let ds = dataset_for(cfg)?;
    let plan = stratified_kfold(&ds, cfg.folds, cfg.seed())?;
    let dims = Dims {
        input: ds.feature_dim(),
        ..Dims::FULL
    };
    let cv = run_cv::<Real>(&ds, &plan, cfg.variant, &dims, &cfg.train)?;
    fs::create_dir_all(&cfg.out_dir)?;
    for fold in &cv.folds {
        save_params(
            &fold.params,
            cfg.out_dir.join(format!("fold_{}.ckpt", fold.fold)),
        )?;
        write(
            &cfg.out_dir.join(format!("fold_{}_history.csv", fold.fold)),
            fold.history.to_csv(),
        )?;
    }
    let report = cv.eval_report();
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write(&cfg.out_dir.join("report.json"), json + "\n")?;
    cfg.echo()?;
    let a = &report.aggregate;
    println!(
        "{}: accuracy {:.4} ± {:.4}  precision {:.4} ± {:.4}  recall {:.4} ± {:.4}  f1 {:.4} ± {:.4}",
        cfg.variant, a.accuracy.mean, a.accuracy.std, a.precision.mean, a.precision.std,
        a.recall.mean, a.recall.std, a.f1.mean, a.f1.std
    );
    println!("artifacts in {}", cfg.out_dir.display());
    Ok(EXIT_OK)
}

pub fn ablate(cfg: &AppConfig) -> CliResult<i32> {
    cfg.validate()?;
    let ds = dataset_for(cfg)?;
    let plan = stratified_kfold(&ds, cfg.folds, cfg.seed())?;
    let dims = Dims {
        input: ds.feature_dim(),
        ..Dims::FULL
    };
    let report = run_ablation(&ds, &plan, &cfg.variants, &dims, &cfg.train)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let table = report.render_table();
    write(&cfg.out_dir.join("ablation.json"), report.to_json() + "\n")?;
    write(&cfg.out_dir.join("ablation.csv"), report.to_csv())?;
    write(&cfg.out_dir.join("ablation.txt"), &table)?;
    cfg.echo()?;
    print!("{table}");
    Ok(EXIT_OK)
}

/// Scores JSONL records from `input` (a path or `-`) or a single inline
/// record. Bad lines are reported on stderr and processing continues.
pub fn infer(
    checkpoint: &Path,
    input: Option<&Path>,
    record: Option<&str>,
    threshold: f64,
) -> CliResult<i32> {
    let params = load_params::<Real>(checkpoint)?;
    let reader: Box<dyn BufRead> = match (record, input) {
        (Some(r), None) => Box::new(io::Cursor::new(r.to_owned())),
        (None, Some(p)) if p == Path::new("-") => Box::new(BufReader::new(io::stdin())),
        (None, Some(p)) => {
            Box::new(BufReader::new(File::open(p).map_err(|e| {
                CliError::io(format!("cannot open {}: {e}", p.display()))
            })?))
        }
        _ => return Err(CliError::usage("give exactly one of --input or --record")),
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut failed = 0usize;
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match handle_line(&params, threshold, &line, n + 1) {
            Ok(resp) => writeln!(
                out,
                "{}",
                serde_json::to_string(&resp).expect("response serializes")
            )?,
            Err(e) => {
                failed += 1;
                eprintln!("line {}: {}", e.line, e.error);
            }
        }
    }
    Ok(if failed == 0 { EXIT_OK } else { EXIT_USAGE })
}

pub fn serve_cmd(
    checkpoint: &Path,
    transport: &str,
    max_connections: Option<usize>,
    threshold: f64,
) -> CliResult<i32> {
    let transport: Transport = transport.parse()?;
    let params = load_params::<Real>(checkpoint)?;
    let log = serve(params, threshold, transport, max_connections)?;
    let summary = serde_json::to_string(&log.summary()).expect("summary serializes");
    eprintln!("latency summary {summary}");
    Ok(EXIT_OK)
}

/// Finite-difference check of every variant at reduced width.
pub fn gradcheck(corrupt_backward: bool) -> CliResult<i32> {
    let dims = Dims::scaled(8);
    let mut all_ok = true;
    for v in ModelVariant::ALL {
        let err = gradcheck_variant(v, &dims, GRADCHECK_SEED, corrupt_backward)?;
        let ok = err < GRADCHECK_TOLERANCE;
        all_ok &= ok;
        println!(
            "{:<22} max_rel_err {err:.3e}  {}",
            v.name(),
            if ok { "ok" } else { "FAIL" }
        );
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_RUNTIME })
}
