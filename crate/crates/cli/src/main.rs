use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tfn_cli::commands;
use tfn_cli::error::{CliResult, EXIT_USAGE};
use tfn_cli::AppConfig;

#[derive(Parser)]
#[command(name = "tfn", version, about = "Tensor fusion fraud classifier")]
struct Cli {
    /// Flat key = value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fraud when probability >= threshold.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Override any config key, e.g. --set max_epochs=20. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataArgs {
    /// Dataset file (binary or JSONL); omitted means synthetic data.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    folds: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic dataset.
    GenData {
        #[arg(long)]
        output: Option<PathBuf>,
        /// binary or jsonl.
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        n_total: Option<usize>,
        #[arg(long)]
        n_fraud: Option<usize>,
    },
    /// Cross-validate one variant and keep per-fold checkpoints.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        variant: Option<String>,
    },
    /// Cross-validate several variants on the same folds.
    Ablate {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated variant names; default all.
        #[arg(long)]
        variants: Option<String>,
    },
    /// Score JSONL records with a checkpoint.
    Infer {
        #[arg(long)]
        checkpoint: PathBuf,
        /// JSONL file, or - for stdin.
        #[arg(long, conflicts_with = "record")]
        input: Option<PathBuf>,
        /// A single JSON record.
        #[arg(long)]
        record: Option<String>,
    },
    /// Answer newline-delimited JSON requests.
    Serve {
        #[arg(long)]
        checkpoint: PathBuf,
        /// stdio or tcp:<port>.
        #[arg(long, default_value = "stdio")]
        transport: String,
        /// Stop after this many TCP connections.
        #[arg(long)]
        max_connections: Option<usize>,
    },
    /// Finite-difference gradient check of all variants.
    Gradcheck {
        #[arg(long, hide = true)]
        corrupt_backward: bool,
    },
}

fn resolve(cli: &Cli) -> CliResult<AppConfig> {
    let mut cfg = AppConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    cfg.apply_overrides(&cli.overrides)?;
    let mut flags: Vec<(&str, String)> = Vec::new();
    if let Some(s) = cli.seed {
        flags.push(("seed", s.to_string()));
    }
    if let Some(t) = cli.threshold {
        flags.push(("threshold", t.to_string()));
    }
    if let Some(d) = &cli.out_dir {
        flags.push(("out_dir", d.display().to_string()));
    }
    match &cli.command {
        Command::GenData {
            format,
            n_total,
            n_fraud,
            ..
        } => {
            if let Some(f) = format {
                flags.push(("format", f.clone()));
            }
            if let Some(n) = n_total {
                flags.push(("n_total", n.to_string()));
            }
            if let Some(n) = n_fraud {
                flags.push(("n_fraud", n.to_string()));
            }
        }
        Command::Train { data, variant } => {
            push_data(&mut flags, data);
            if let Some(v) = variant {
                flags.push(("variant", v.clone()));
            }
        }
        Command::Ablate { data, variants } => {
            push_data(&mut flags, data);
            if let Some(v) = variants {
                flags.push(("variants", v.clone()));
            }
        }
        _ => {}
    }
    for (k, v) in flags {
        cfg.set(k, &v)?;
    }
    Ok(cfg)
}

fn push_data(flags: &mut Vec<(&str, String)>, data: &DataArgs) {
    if let Some(d) = &data.data {
        flags.push(("data", d.display().to_string()));
    }
    if let Some(k) = data.folds {
        flags.push(("folds", k.to_string()));
    }
}

fn run(cli: Cli) -> CliResult<i32> {
    let cfg = resolve(&cli)?;
    let threshold = cfg.train.threshold;
    match cli.command {
        Command::GenData { output, .. } => commands::gen_data(&cfg, output),
        Command::Train { .. } => commands::train(&cfg),
        Command::Ablate { .. } => commands::ablate(&cfg),
        Command::Infer {
            checkpoint,
            input,
            record,
        } => commands::infer(&checkpoint, input.as_deref(), record.as_deref(), threshold),
        Command::Serve {
            checkpoint,
            transport,
            max_connections,
        } => commands::serve_cmd(&checkpoint, &transport, max_connections, threshold),
        Command::Gradcheck { corrupt_backward } => commands::gradcheck(corrupt_backward),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
