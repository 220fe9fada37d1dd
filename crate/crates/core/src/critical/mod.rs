//! Critical points of an invariant function on a global-quotient chart: search,
//! orbit bookkeeping, stabilizers and the equivariant index/coindex split.

mod analysis;
mod data;
mod model;
mod search;

pub use analysis::{analyze_critical_point, assert_morse, point_label, MorseCertificate};
pub use data::CriticalPointData;
pub use model::{QuotientModel, SeedConfig, Tolerances};
pub use search::{
    find_critical_points, orbit_dedup, orbit_distance, orbit_representative, stabilizer_of, CriticalSearch, SeedStats,
};

use thiserror::Error;

use crate::expr::ExprError;
use crate::group::GroupError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriticalError {
    #[error("no seed points configured")]
    NoSeeds,
    #[error("function is not finite at seed {point:?}")]
    NonFiniteFunctionValue { point: Vec<f64> },
    #[error("function is not invariant under the group (worst violation {violation:e})")]
    NotInvariant { violation: f64 },
    #[error(
        "degenerate critical point at {location:?} (Hessian eigenvalue {eigenvalue:e}); the function is not Morse"
    )]
    DegenerateCriticalPoint { location: Vec<f64>, eigenvalue: f64 },
    #[error("index/coindex split is not stabilizer-invariant (residual {residual:e})")]
    SplitNotInvariant { residual: f64 },
    #[error("not a critical point: |grad f| = {gradient_norm:e} at {location:?}")]
    NotCritical { location: Vec<f64>, gradient_norm: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("stabilizer declared with order {declared} but its generators give {generated}")]
    StabilizerOrderMismatch { declared: usize, generated: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}
