//! Evaluation of agent behavior: propositional conflict checking over
//! plan-state traces, and Kolmogorov–Smirnov distribution fitting and
//! ranking over behavioral samples.

mod conflicts;
mod dist;
mod fit;

pub use conflicts::{
    check_trace_conflicts, sra_conflict_rules, ConflictHit, ConflictRule, JamGuard, TraceReport,
};
pub use dist::{DistributionSpec, Family, FAMILY_LIBRARY};
pub use fit::{
    fit_distribution, fit_report, ks_critical, ks_statistic, order_statistics_sim, rank_fits,
    Extreme, FitReport, FitResult, FitRow,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
    #[error("conflict rule '{0}' needs at least two forbidden plans")]
    InvalidRule(String),
    #[error("invalid distribution parameters: {0}")]
    InvalidParameters(String),
    #[error("unsupported significance level {0} (use 0.10, 0.05 or 0.01)")]
    UnsupportedAlpha(f64),
    #[error("sample unsupported for {family}: {reason}")]
    UnsupportedSample { family: &'static str, reason: String },
    #[error("no distribution family in the library applies to the sample")]
    NoApplicableFamily,
}
