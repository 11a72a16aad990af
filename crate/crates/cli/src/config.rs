//! Flat `key = value` run configuration.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' any*
//! entry   := key ws* '=' ws* value
//! ```
//!
//! Keys are the field names listed by [`AppConfig::KEYS`]. Unknown or
//! repeated keys are errors. Whitespace around keys and values is trimmed.
//! An empty value for `data` means "generate the synthetic dataset".

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use tfn_core::data::{DataFormat, SynthConfig};
use tfn_core::model::ModelVariant;
use tfn_core::train::TrainConfig;

use crate::error::{CliError, CliResult};

pub const RESOLVED_CONFIG_FILE: &str = "resolved_config.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct AppConfig {
    pub synth: SynthConfig,
    pub train: TrainConfig,
    pub folds: usize,
    pub data: Option<PathBuf>,
    pub format: DataFormat,
    pub variant: ModelVariant,
    pub variants: Vec<ModelVariant>,
    pub out_dir: PathBuf,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            synth: SynthConfig::default(),
            train: TrainConfig::default(),
            folds: 5,
            data: None,
            format: DataFormat::Binary,
            variant: ModelVariant::TfComplete,
            variants: ModelVariant::ALL.to_vec(),
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::usage(format!("invalid value '{value}' for '{key}'")))
}

fn parse_variant(value: &str) -> CliResult<ModelVariant> {
    value
        .parse()
        .map_err(|e: tfn_core::Error| CliError::usage(e.to_string()))
}

fn format_name(f: DataFormat) -> &'static str {
    match f {
        DataFormat::Binary => "binary",
        DataFormat::Jsonl => "jsonl",
    }
}

impl AppConfig {
    pub const KEYS: &'static [&'static str] = &[
        "seed",
        "n_total",
        "n_fraud",
        "a",
        "b",
        "c",
        "sigma",
        "d_sig",
        "amplitude",
        "feature_dim",
        "lr_max",
        "lr_min",
        "batch_size",
        "max_epochs",
        "t_max",
        "weight_decay",
        "beta1",
        "beta2",
        "eps",
        "dropout_p",
        "patience",
        "threshold",
        "val_fraction",
        "folds",
        "data",
        "format",
        "variant",
        "variants",
        "out_dir",
    ];

    /// The seed drives data generation, fold assignment and training.
    pub fn seed(&self) -> u64 {
        self.train.seed
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let v = value.trim();
        let (s, t) = (&mut self.synth, &mut self.train);
        match key.trim() {
            "seed" => {
                t.seed = parse(key, v)?;
                s.seed = t.seed;
            }
            "n_total" => s.n_total = parse(key, v)?,
            "n_fraud" => s.n_fraud = parse(key, v)?,
            "a" => s.a = parse(key, v)?,
            "b" => s.b = parse(key, v)?,
            "c" => s.c = parse(key, v)?,
            "sigma" => s.sigma = parse(key, v)?,
            "d_sig" => s.d_sig = parse(key, v)?,
            "amplitude" => s.amplitude = parse(key, v)?,
            "feature_dim" => s.feature_dim = parse(key, v)?,
            "lr_max" => t.lr_max = parse(key, v)?,
            "lr_min" => t.lr_min = parse(key, v)?,
            "batch_size" => t.batch_size = parse(key, v)?,
            "max_epochs" => t.max_epochs = parse(key, v)?,
            "t_max" => t.t_max = Some(parse(key, v)?),
            "weight_decay" => t.weight_decay = parse(key, v)?,
            "beta1" => t.beta1 = parse(key, v)?,
            "beta2" => t.beta2 = parse(key, v)?,
            "eps" => t.eps = parse(key, v)?,
            "dropout_p" => t.dropout_p = parse(key, v)?,
            "patience" => t.patience = parse(key, v)?,
            "threshold" => t.threshold = parse(key, v)?,
            "val_fraction" => t.val_fraction = parse(key, v)?,
            "folds" => self.folds = parse(key, v)?,
            "data" => self.data = (!v.is_empty()).then(|| PathBuf::from(v)),
            "format" => {
                self.format = v
                    .parse()
                    .map_err(|e: tfn_core::Error| CliError::usage(e.to_string()))?
            }
            "variant" => self.variant = parse_variant(v)?,
            "variants" => {
                self.variants = v
                    .split(',')
                    .map(str::trim)
                    .filter(|x| !x.is_empty())
                    .map(parse_variant)
                    .collect::<CliResult<_>>()?;
            }
            "out_dir" => self.out_dir = PathBuf::from(v),
            other => {
                return Err(CliError::usage(format!(
                    "unknown config key '{other}'; known keys: {}",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies `key=value` text on top of the current values.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> CliResult<()> {
        let mut seen = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!("{origin}:{}: expected 'key = value'", n + 1))
            })?;
            let key = key.trim();
            if seen.contains(&key) {
                return Err(CliError::usage(format!(
                    "{origin}:{}: duplicate key '{key}'",
                    n + 1
                )));
            }
            seen.push(key);
            self.set(key, value)
                .map_err(|e| CliError::usage(format!("{origin}:{}: {}", n + 1, e.message)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Applies `key=value` overrides given on the command line.
    pub fn apply_overrides(&mut self, pairs: &[String]) -> CliResult<()> {
        for pair in pairs {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("--set expects key=value, got '{pair}'")))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        self.train.validate()?;
        if self.folds < 2 {
            return Err(CliError::usage("folds must be at least 2"));
        }
        if self.variants.is_empty() {
            return Err(CliError::usage("variants must not be empty"));
        }
        Ok(())
    }

    /// Every effective value in the grammar above; parsing the result yields
    /// an identical config.
    pub fn render(&self) -> String {
        let (s, t) = (&self.synth, &self.train);
        let variants: Vec<&str> = self.variants.iter().map(|v| v.name()).collect();
        let data = self
            .data
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_default();
        let values: Vec<String> = vec![
            t.seed.to_string(),
            s.n_total.to_string(),
            s.n_fraud.to_string(),
            s.a.to_string(),
            s.b.to_string(),
            s.c.to_string(),
            s.sigma.to_string(),
            s.d_sig.to_string(),
            s.amplitude.to_string(),
            s.feature_dim.to_string(),
            t.lr_max.to_string(),
            t.lr_min.to_string(),
            t.batch_size.to_string(),
            t.max_epochs.to_string(),
            t.t_max().to_string(),
            t.weight_decay.to_string(),
            t.beta1.to_string(),
            t.beta2.to_string(),
            t.eps.to_string(),
            t.dropout_p.to_string(),
            t.patience.to_string(),
            t.threshold.to_string(),
            t.val_fraction.to_string(),
            self.folds.to_string(),
            data,
            format_name(self.format).to_string(),
            self.variant.name().to_string(),
            variants.join(","),
            self.out_dir.display().to_string(),
        ];
        let mut out = String::from("# resolved configuration\n");
        for (k, v) in Self::KEYS.iter().zip(values) {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// Writes [`render`](Self::render) into the output directory.
    pub fn echo(&self) -> CliResult<PathBuf> {
        fs::create_dir_all(&self.out_dir)?;
        let path = self.out_dir.join(RESOLVED_CONFIG_FILE);
        fs::write(&path, self.render())?;
        Ok(path)
    }
}
