//! The floating-point scalar abstraction shared by the numeric modules.
//!
//! Everything that touches matrices, Newton iterations or flows is generic over
//! [`Scalar`]. Exact quantities (group matrices with rational entries, ages,
//! polynomial exponents) use `Rational64` instead and never go through this trait.

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// f32 or f64, together with the default tolerances that make sense at that precision.
pub trait Scalar: RealField + Copy + ToPrimitive + Send + Sync + 'static {
    /// Entrywise tolerance when comparing group elements given by floats.
    const ELEMENT_TOL: f64;
    /// Gradient norm below which a point counts as critical.
    const NEWTON_TOL: f64;
    /// Distance below which two chart points are identified.
    const ORBIT_TOL: f64;
    /// Tolerance for subspace invariance, characters and eigenphase snapping.
    const REP_TOL: f64;

    #[inline]
    fn of(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const ELEMENT_TOL: f64 = 1e-9;
    const NEWTON_TOL: f64 = 1e-10;
    const ORBIT_TOL: f64 = 1e-6;
    const REP_TOL: f64 = 1e-6;
}

impl Scalar for f32 {
    const ELEMENT_TOL: f64 = 1e-5;
    const NEWTON_TOL: f64 = 1e-4;
    const ORBIT_TOL: f64 = 1e-3;
    const REP_TOL: f64 = 1e-3;
}
