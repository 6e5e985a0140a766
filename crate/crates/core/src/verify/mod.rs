//! Numeric ground truth for every symbolic claim.
//!
//! Identities are never decided symbolically. Instead both sides are
//! evaluated at seeded random points of a guarded [`Domain`] and the largest
//! relative discrepancy is recorded in a [`VerificationReport`]. The same
//! module hosts the independent oracles: central finite differences for Lie
//! derivatives, Jacobian rank for functional independence, and fourth-order
//! Runge-Kutta flows along characteristic curves.

mod domain;
mod flow;
mod oracle;
mod rank;
mod report;
mod residual;

pub use domain::{Domain, Guard, GuardKind, Interval, DEFAULT_GUARD_EPSILON};
pub use flow::{flow_rk4, invariance_drift, transport_drift, Drift, FlowSettings, Trajectory};
pub use oracle::{lie_derivative_fd, DEFAULT_FD_STEP};
pub use rank::{independence_rank, matrix_rank, RankReport, RANK_PIVOT_THRESHOLD};
pub use report::{Status, VerificationReport};
pub use residual::{compare_exprs, max_relative_gap, numeric_equal, residual_max};

use crate::expr::EvalError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty domain: intervals for {0:?} do not overlap")]
    EmptyDomain(String),
    #[error("domains use different coordinate systems")]
    CoordinateMismatch,
    #[error("sampling exhausted: accepted {accepted} of {requested} points after {rejected} rejections")]
    SamplingExhausted { requested: usize, accepted: usize, rejected: usize },
    #[error("{source} at {point}")]
    Eval { source: EvalError, point: String },
}

impl VerifyError {
    pub(crate) fn eval(source: EvalError, point: &crate::expr::Point) -> Self {
        VerifyError::Eval { source, point: point.to_string() }
    }
}

/// Sampling parameters shared by all residual checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSettings {
    pub samples: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for CheckSettings {
    fn default() -> Self {
        CheckSettings { samples: 200, tolerance: 1e-8, seed: 42 }
    }
}

impl CheckSettings {
    pub fn with_tolerance(self, tolerance: f64) -> Self {
        CheckSettings { tolerance, ..self }
    }

    pub fn with_samples(self, samples: usize) -> Self {
        CheckSettings { samples, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        CheckSettings { seed, ..self }
    }
}

/// `max(1, |reference|)`, the scale every relative residual is divided by.
pub fn relative_scale(reference: f64) -> f64 {
    reference.abs().max(1.0)
}
