//! Experiment orchestration for self-supervised similarity-based link
//! prediction: configuration, multi-seed runs, ablation sweeps, diagnostics
//! and report generation. The `threeslp` binary is a thin wrapper over this
//! library.

pub mod ablation;
pub mod analyze;
pub mod config;
pub mod gradcheck;
pub mod pipeline;
pub mod prepare;
pub mod report;

pub use ablation::{alpha_grid, k_grid, run_ablation, AblationReport, SweepPoint};
pub use analyze::{analyze, AnalysisReport};
pub use config::{ExperimentConfig, Mode, Overrides};
pub use gradcheck::{run_gradcheck, GradcheckSummary};
pub use pipeline::{embed, load_graph, run_experiment};
pub use report::{ExperimentReport, RunRecord};

use slp_core::Error;

/// Top-level failure, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(_) | Error::Split(_) => CliError::Config(e.to_string()),
            Error::Parse { .. } | Error::Io { .. } | Error::Dimension { .. } => CliError::Data(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

pub(crate) fn io_err(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Lowercase hex SHA-256 of `bytes`, truncated to `len` characters.
pub fn short_hash(bytes: &[u8], len: usize) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    let mut out: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    out.truncate(len);
    out
}
