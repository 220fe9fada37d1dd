//! Finite groups of affine isometries acting on a chart, and the real
//! representations they carry on invariant subspaces.

mod complex;
mod finite;
mod isometry;
mod rep;
pub mod torus;

pub use complex::{age, ComplexStructure};
pub use finite::{generate_group, FiniteActionGroup, DEFAULT_MAX_ORDER};
pub use isometry::{AffineIsometry, ExactAffine};
pub(crate) use rep::dominant_subspace;
pub use rep::RealRepresentation;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("group closure exceeded {max_order} elements; the generated group is probably infinite")]
    OrderExceeded { max_order: usize },
    #[error("generator {index} is not an isometry (max |AᵀA - I| = {defect:e})")]
    NotIsometry { index: usize, defect: f64 },
    #[error("generator {index} does not preserve the integer lattice")]
    LatticeNotPreserved { index: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("element set is not closed under multiplication")]
    NotClosed,
    #[error("element index {0} out of range")]
    NoSuchElement(usize),
    #[error("subspace is not invariant under the group (residual {residual:e})")]
    NotInvariant { residual: f64 },
    #[error("basis is not orthonormal (defect {defect:e})")]
    NotOrthonormal { defect: f64 },
    #[error("matrix is not a complex structure: {0}")]
    NotComplexStructure(String),
    #[error("group action is not complex-linear on this subspace (residual {residual:e})")]
    ActionNotComplexLinear { residual: f64 },
    #[error("eigenphase multiplicities are not integral (worst defect {defect:e})")]
    PhaseNotRational { defect: f64 },
}
