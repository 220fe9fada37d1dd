use nalgebra::DMatrix;
use num_rational::Rational64;

use super::{GroupError, RealRepresentation};
use crate::Scalar;

/// An orthogonal `J` with `J² = -1`, identifying the chart with `Cⁿᐟ²`.
#[derive(Clone, Debug)]
pub struct ComplexStructure<T: Scalar> {
    matrix: DMatrix<T>,
}

impl<T: Scalar> ComplexStructure<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self, GroupError> {
        if !matrix.is_square() || !matrix.nrows().is_multiple_of(2) {
            return Err(GroupError::NotComplexStructure(format!(
                "expected an even-dimensional square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let n = matrix.nrows();
        let id = DMatrix::<T>::identity(n, n);
        let tol = T::of(T::REP_TOL);
        let square = (&matrix * &matrix + &id).amax();
        if square > tol {
            return Err(GroupError::NotComplexStructure(format!("|J² + 1| = {:e}", square.as_f64())));
        }
        let orth = (matrix.transpose() * &matrix - id).amax();
        if orth > tol {
            return Err(GroupError::NotComplexStructure(format!("|JᵀJ - 1| = {:e}", orth.as_f64())));
        }
        Ok(Self { matrix })
    }

    /// Block-diagonal `[[0, -1], [1, 0]]`, i.e. `(x₁, y₁, x₂, y₂, …)` with `zₖ = xₖ + i yₖ`.
    pub fn standard(n: usize) -> Result<Self, GroupError> {
        if !n.is_multiple_of(2) {
            return Err(GroupError::NotComplexStructure(format!("odd dimension {n}")));
        }
        let mut m = DMatrix::<T>::zeros(n, n);
        for k in 0..n / 2 {
            m[(2 * k, 2 * k + 1)] = -T::one();
            m[(2 * k + 1, 2 * k)] = T::one();
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |JA - AJ|`.
    pub fn commutator_residual(&self, a: &DMatrix<T>) -> T {
        (&self.matrix * a - a * &self.matrix).amax()
    }

    /// `J` expressed in an orthonormal basis of an invariant subspace.
    pub fn restrict(&self, basis: &DMatrix<T>) -> Result<DMatrix<T>, GroupError> {
        if basis.nrows() != self.dim() {
            return Err(GroupError::DimensionMismatch { expected: self.dim(), found: basis.nrows() });
        }
        let image = &self.matrix * basis;
        let restricted = basis.transpose() * &image;
        let residual = (image - basis * &restricted).amax();
        if residual > T::of(T::REP_TOL) {
            return Err(GroupError::ActionNotComplexLinear { residual: residual.as_f64() });
        }
        Ok(restricted)
    }
}

/// Age (degree-shifting number) of `g` acting on `rep`.
///
/// The complex-linear action has eigenvalues `exp(2πi·k/d)`, `d` the order of
/// `g`. Their multiplicities are read off the complex character
/// `tr_C(A) = (tr A - i·tr(JA)) / 2` of the powers of `g` by a discrete Fourier
/// transform; each must be a non-negative integer up to tolerance. The age is
/// `Σ mₖ·k/d`.
pub fn age<T: Scalar>(
    g: usize,
    j: &ComplexStructure<T>,
    rep: &RealRepresentation<T>,
) -> Result<Rational64, GroupError> {
    let group = rep.group();
    if g >= group.order() {
        return Err(GroupError::NoSuchElement(g));
    }
    let k = rep.dim();
    if k == 0 {
        return Ok(Rational64::from_integer(0));
    }
    let jw = j.restrict(rep.basis())?;
    let a = rep.action(g);
    let comm = (&jw * a - a * &jw).amax();
    if comm > T::of(T::REP_TOL) {
        return Err(GroupError::ActionNotComplexLinear { residual: comm.as_f64() });
    }

    let d = group.element_order(g);
    let mut traces = Vec::with_capacity(d);
    let mut power = DMatrix::<T>::identity(k, k);
    for _ in 0..d {
        let re = power.trace().as_f64() / 2.0;
        let im = -(&jw * &power).trace().as_f64() / 2.0;
        traces.push((re, im));
        power = a * power;
    }

    let mut total = Rational64::from_integer(0);
    let mut count = 0i64;
    let mut worst = 0.0f64;
    for phase in 0..d {
        let (mut re, mut im) = (0.0, 0.0);
        for (step, (tr, ti)) in traces.iter().enumerate() {
            let theta = -2.0 * std::f64::consts::PI * ((phase * step) % d) as f64 / d as f64;
            let (s, c) = theta.sin_cos();
            re += tr * c - ti * s;
            im += tr * s + ti * c;
        }
        re /= d as f64;
        im /= d as f64;
        let m = re.round();
        let defect = (re - m).abs().max(im.abs());
        worst = worst.max(defect);
        if m < 0.0 {
            worst = worst.max(-m);
        }
        let m = m.max(0.0) as i64;
        count += m;
        total += Rational64::new(m * phase as i64, d as i64);
    }
    if worst > T::REP_TOL.max(1e-6) || 2 * count != k as i64 {
        return Err(GroupError::PhaseNotRational { defect: worst });
    }
    Ok(total)
}
