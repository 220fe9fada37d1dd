use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use super::search::{canonical, find_critical_points, orbit_dedup, orbit_distance, stabilizer_of, SeedStats};
use super::{CriticalError, CriticalPointData, QuotientModel};
use crate::group::{dominant_subspace, FiniteActionGroup, GroupError, RealRepresentation};
use crate::Scalar;

/// Result of a successful Morse check.
#[derive(Clone, Debug)]
pub struct MorseCertificate<T: Scalar> {
    /// One entry per orbit, in canonical order.
    pub points: Vec<CriticalPointData<T>>,
    pub stats: SeedStats,
    /// Critical points found before orbit deduplication.
    pub upstairs: usize,
    /// Smallest orbit distance between two representatives; `None` with fewer than two.
    pub min_separation: Option<T>,
}

/// `"(0.5, 0, 0, 0)"`, rounded to nine decimals.
pub fn point_label<T: Scalar>(x: &DVector<T>) -> String {
    let parts: Vec<String> = x
        .iter()
        .map(|v| {
            let r = (v.as_f64() * 1e9).round() / 1e9 + 0.0;
            format!("{r}")
        })
        .collect();
    format!("({})", parts.join(", "))
}

/// Reynolds average `(1/|G|) Σ A P Aᵀ` of a projector over the linear parts.
fn reynolds<T: Scalar>(group: &FiniteActionGroup<T>, p: &DMatrix<T>) -> DMatrix<T> {
    let mut sum = DMatrix::zeros(p.nrows(), p.ncols());
    for g in group.elements() {
        let a = g.linear();
        sum += a * p * a.transpose();
    }
    sum / T::of(group.order() as f64)
}

/// Invariant subspace spanned by the eigenvectors selected by `keep`.
fn invariant_eigenspace<T: Scalar>(
    group: &Arc<FiniteActionGroup<T>>,
    eig: &SymmetricEigen<T, nalgebra::Dyn>,
    hessian: &DMatrix<T>,
    keep: impl Fn(T) -> bool,
    tol: T,
) -> Result<RealRepresentation<T>, CriticalError> {
    let n = hessian.nrows();
    let cols: Vec<usize> = (0..n).filter(|&i| keep(eig.eigenvalues[i])).collect();
    let mut v = DMatrix::<T>::zeros(n, cols.len());
    for (j, &c) in cols.iter().enumerate() {
        v.set_column(j, &eig.eigenvectors.column(c));
    }
    let projector = reynolds(group, &(&v * v.transpose()));
    let basis = dominant_subspace(&projector);
    if basis.ncols() != cols.len() {
        return Err(CriticalError::SplitNotInvariant { residual: (projector - &v * v.transpose()).amax().as_f64() });
    }
    // the averaged subspace must still be the eigenspace
    let drift = (&basis - &v * (v.transpose() * &basis)).amax();
    if drift > tol {
        return Err(CriticalError::SplitNotInvariant { residual: drift.as_f64() });
    }
    RealRepresentation::new(group.clone(), basis).map_err(|e| match e {
        GroupError::NotInvariant { residual } => CriticalError::SplitNotInvariant { residual },
        other => other.into(),
    })
}

/// Index and coindex of the critical point at `x`, with the stabilizer action.
pub fn analyze_critical_point<T: Scalar>(
    model: &QuotientModel<T>,
    x: &DVector<T>,
) -> Result<CriticalPointData<T>, CriticalError> {
    if x.len() != model.dim() {
        return Err(CriticalError::DimensionMismatch { expected: model.dim(), found: x.len() });
    }
    let tol = model.tolerances();
    let location: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
    let (value, grad, hess) = model.function().value_gradient_hessian(x)?;
    let gnorm = grad.norm();
    if !gnorm.is_finite() || gnorm > tol.newton {
        return Err(CriticalError::NotCritical { location, gradient_norm: gnorm.as_f64() });
    }
    let hessian = (&hess + hess.transpose()) * T::of(0.5);
    let eig = SymmetricEigen::new(hessian.clone());
    let scale = eig.eigenvalues.amax();
    let threshold = (tol.hessian_zero * scale).max(tol.hessian_floor);
    if let Some(&small) = eig.eigenvalues.iter().find(|l| l.abs() <= threshold) {
        return Err(CriticalError::DegenerateCriticalPoint { location, eigenvalue: small.as_f64() });
    }

    let stabilizer = Arc::new(stabilizer_of(model, x)?);
    let index_rep = invariant_eigenspace(&stabilizer, &eig, &hessian, |l| l < T::zero(), tol.split)?;
    let coindex_rep = invariant_eigenspace(&stabilizer, &eig, &hessian, |l| l > T::zero(), tol.split)?;

    // Rayleigh quotients on the final bases
    for (rep, sign) in [(&index_rep, -T::one()), (&coindex_rep, T::one())] {
        if rep.dim() == 0 {
            continue;
        }
        let restricted = rep.basis().transpose() * &hessian * rep.basis();
        let e = SymmetricEigen::new((&restricted + restricted.transpose()) * T::of(0.5));
        if e.eigenvalues.iter().any(|l| *l * sign <= threshold) {
            return Err(CriticalError::SplitNotInvariant { residual: e.eigenvalues.amin().as_f64() });
        }
    }

    let location = canonical(model, x);
    Ok(CriticalPointData::from_chart(
        point_label(&location),
        location,
        value,
        hessian,
        index_rep,
        coindex_rep,
        model.complex_structure().cloned(),
    ))
}

/// Finds, deduplicates and analyzes every critical point reachable from the
/// configured seeds. Fails on the first degenerate one.
pub fn assert_morse<T: Scalar>(model: &QuotientModel<T>) -> Result<MorseCertificate<T>, CriticalError> {
    let search = find_critical_points(model)?;
    let reps = orbit_dedup(model, &search.points);
    let analyzed: Vec<Result<CriticalPointData<T>, CriticalError>> =
        reps.par_iter().map(|x| analyze_critical_point(model, x)).collect();
    let points = analyzed.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut min_separation: Option<T> = None;
    for i in 0..reps.len() {
        for j in 0..i {
            let d = orbit_distance(model, &reps[i], &reps[j]);
            if min_separation.is_none_or(|m| d < m) {
                min_separation = Some(d);
            }
        }
    }
    Ok(MorseCertificate { points, stats: search.stats, upstairs: search.points.len(), min_separation })
}
