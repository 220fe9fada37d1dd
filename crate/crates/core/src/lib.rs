//! Morse theory on global-quotient orbifold charts.
//!
//! A chart is a finite group of affine isometries acting on `Rⁿ` or on the
//! torus `Rⁿ/Zⁿ`, together with an invariant function given as an expression.
//! The pipeline finds the critical points, splits each Hessian into index and
//! coindex representations of the stabilizer, enumerates inertia sectors and
//! assembles the ordinary, inertia and orbifold Morse polynomials, which are
//! then compared against Poincaré polynomials through the Morse inequalities.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`.

pub mod builtin;
pub mod critical;
pub mod expr;
pub mod flowlab;
pub mod formats;
pub mod group;
pub mod inequalities;
pub mod morse_poly;
pub mod scalar;

pub use scalar::Scalar;

use thiserror::Error;

pub use inequalities::{InequalityReport, ResolutionLevel};
pub use morse_poly::{ExponentPolynomial, InertiaSectorDatum};

pub type Group = group::FiniteActionGroup<f64>;
pub type Isometry = group::AffineIsometry<f64>;
pub type Representation = group::RealRepresentation<f64>;
pub type ComplexStructure = group::ComplexStructure<f64>;
pub type Model = critical::QuotientModel<f64>;
pub type CriticalPoint = critical::CriticalPointData<f64>;
pub type Certificate = critical::MorseCertificate<f64>;
pub type Lab<'a> = flowlab::FlowLab<'a, f64>;
pub type Trajectory = flowlab::Trajectory<f64>;

pub type Group32 = group::FiniteActionGroup<f32>;
pub type Model32 = critical::QuotientModel<f32>;
pub type CriticalPoint32 = critical::CriticalPointData<f32>;

/// Any error the library reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Group(#[from] group::GroupError),
    #[error(transparent)]
    Expr(#[from] expr::ExprError),
    #[error(transparent)]
    Critical(#[from] critical::CriticalError),
    #[error(transparent)]
    MorsePoly(#[from] morse_poly::MorsePolyError),
    #[error(transparent)]
    Inequality(#[from] inequalities::InequalityError),
    #[error(transparent)]
    Flow(#[from] flowlab::FlowError),
    #[error(transparent)]
    Format(#[from] formats::FormatError),
    #[error(transparent)]
    Builtin(#[from] builtin::BuiltinError),
}
