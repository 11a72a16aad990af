//! Command-line front end: data generation, training, ablation, inference
//! and the gradient self-check.

pub mod commands;
pub mod config;
pub mod error;
pub mod latency;
pub mod protocol;
pub mod serve;

pub use config::AppConfig;
pub use error::{CliError, CliResult};
pub use protocol::{InferenceRequest, InferenceResponse};
