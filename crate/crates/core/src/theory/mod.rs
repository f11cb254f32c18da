//! Fixed-point constructors, error metrics, and runtime monitors for the
//! convergence guarantees of the iteration.
//!
//! Monitors work in the eigenbasis of `A` (coordinates `Uᵀx`) taken from an
//! oracle [`Spectrum`](crate::linalg::Spectrum). They only read iterates and
//! never feed anything back into the solver.

mod energy;
mod fixed_point;
mod jacobian;
mod metrics;
pub mod monitors;
mod neighborhood;
mod report;
mod residual;

pub use energy::{EnergyContext, StationaryLabel, StationaryPoint};
pub use fixed_point::{
    classify_fixed_point, sample_unstable_spec, construct_fixed_point, enumerate_specs, spec_count, FixedPointClass,
    FixedPointSpec,
};
pub use jacobian::JacobianBlock;
pub use metrics::{
    check_boundary_gap, check_leading_gaps, e_obj, e_vec, optimal_objective, tangent,
    EvecEvaluator, DEGENERACY_GAP,
};
pub use neighborhood::{default_epsilon, proximity_threshold, stationary_proximity, EpsilonThresholds, Proximity};
pub use report::{LemmaSummary, LemmaViolation, MonitorReport, MonitorStatus};
pub(crate) use report::Tally;
pub use residual::{residual_e_norm, residual_e_norm_expansion, residual_e_norms};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("degenerate spectrum: gap {gap:e} between eigenvalues {index} and {next} is below {DEGENERACY_GAP:e}", next = index + 1)]
    Degenerate { index: usize, gap: f64 },
    #[error("invalid fixed-point spec: {0}")]
    InvalidSpec(String),
    #[error("eigenvalue {index} is {value}, not negative")]
    NonNegativeEigenvalue { index: usize, value: f64 },
    #[error("zero vector has no defined angle")]
    ZeroVector,
    #[error("{lemma}: premise not satisfied ({detail})")]
    PremiseViolated { lemma: String, detail: String },
    #[error("{0}")]
    Unsupported(String),
}

/// Runtime monitors that can be attached to a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonitorKind {
    Bounds,
    Tangent,
    NormFloor,
    Energy,
    Offspace,
    Neighborhoods,
}

impl MonitorKind {
    pub const ALL: [MonitorKind; 6] = [
        MonitorKind::Bounds,
        MonitorKind::Tangent,
        MonitorKind::NormFloor,
        MonitorKind::Energy,
        MonitorKind::Offspace,
        MonitorKind::Neighborhoods,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MonitorKind::Bounds => "bounds",
            MonitorKind::Tangent => "tangent",
            MonitorKind::NormFloor => "norm-floor",
            MonitorKind::Energy => "energy",
            MonitorKind::Offspace => "offspace",
            MonitorKind::Neighborhoods => "neighborhoods",
        }
    }
}
