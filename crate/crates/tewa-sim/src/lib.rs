//! Deterministic air-combat simulation harness around the TEWA engine:
//! scenario ingestion, the tick-loop driver wiring the radar and direction
//! center agents to threat assessment and weapon allocation, canned
//! experiments, and report emission.

pub mod cli;
pub mod experiment;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod stream;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error in {path}: {reason}")]
    Parse { path: String, reason: String },
    #[error("validation error at {path}: {reason}")]
    Validation { path: String, reason: String },
    #[error("unknown experiment '{0}' (use jamming, surfaces, order_stats or scaling)")]
    UnknownExperiment(String),
    #[error("tick {tick}: {source}")]
    Agent {
        tick: u64,
        source: tewa_core::agents::AgentError,
    },
    #[error(transparent)]
    Threat(#[from] tewa_core::threat::ThreatError),
    #[error(transparent)]
    Wta(#[from] tewa_core::wta::WtaError),
    #[error(transparent)]
    Eval(#[from] tewa_core::eval::EvalError),
}

impl SimError {
    /// Process exit code per the CLI contract: 1 for input validation
    /// problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Parse { .. }
            | SimError::Validation { .. }
            | SimError::UnknownExperiment(_) => 1,
            _ => 2,
        }
    }

    pub fn validation(path: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::Validation {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
