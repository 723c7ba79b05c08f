//! Experiment harness for `imgseek-core`: synthetic fixtures, CSV feature
//! input, timed end-to-end runs of each scheme and report rendering.

pub mod experiment;
pub mod fixture;
pub mod report;

use imgseek_core::{EncodingError, PaillierError, ProtocolError};
use thiserror::Error;

pub use experiment::{run_experiment, run_experiment_detailed, ExperimentConfig, SchemeRun, SchemeSelection};
pub use fixture::{derive_query, generate_fixture, read_features_csv, Fixture};
pub use report::{emit_report, ReportFormat, ReportRow};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("key generation failed: {0}")]
    Keygen(#[from] PaillierError),
    #[error("protocol failure: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("cannot read features: {0}")]
    Features(String),
    #[error("cannot render report: {0}")]
    Render(String),
}

impl HarnessError {
    /// Process exit status: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Features(_) => 2,
            HarnessError::Protocol(ProtocolError::Record { .. } | ProtocolError::Query(_)) => 2,
            _ => 1,
        }
    }
}

impl From<EncodingError> for HarnessError {
    fn from(e: EncodingError) -> Self {
        HarnessError::Config(e.to_string())
    }
}
