use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{FiniteActionGroup, GroupError};
use crate::Scalar;

/// The restriction of a group's linear action to an invariant subspace `W`.
///
/// `basis` holds an orthonormal basis of `W` as columns (ambient dim × k);
/// `action[g]` is the k × k matrix of element `g` in that basis.
#[derive(Clone, Debug)]
pub struct RealRepresentation<T: Scalar> {
    group: Arc<FiniteActionGroup<T>>,
    basis: DMatrix<T>,
    action: Vec<DMatrix<T>>,
}

impl<T: Scalar> RealRepresentation<T> {
    /// Builds the representation on the span of `basis`, checking invariance.
    pub fn new(group: Arc<FiniteActionGroup<T>>, basis: DMatrix<T>) -> Result<Self, GroupError> {
        if basis.nrows() != group.dim() {
            return Err(GroupError::DimensionMismatch { expected: group.dim(), found: basis.nrows() });
        }
        let k = basis.ncols();
        let defect = (basis.transpose() * &basis - DMatrix::<T>::identity(k, k)).amax();
        let tol = T::of(T::REP_TOL);
        if defect > tol {
            return Err(GroupError::NotOrthonormal { defect: defect.as_f64() });
        }
        let mut action = Vec::with_capacity(group.order());
        let mut residual = T::zero();
        for g in group.elements() {
            let image = g.linear() * &basis;
            let m = basis.transpose() * &image;
            let r = (image - &basis * &m).amax();
            if r > residual {
                residual = r;
            }
            action.push(m);
        }
        if residual > tol {
            return Err(GroupError::NotInvariant { residual: residual.as_f64() });
        }
        Ok(Self { group, basis, action })
    }

    /// The whole ambient space.
    pub fn full(group: Arc<FiniteActionGroup<T>>) -> Self {
        let n = group.dim();
        Self::new(group, DMatrix::identity(n, n)).expect("ambient space is invariant")
    }

    /// The span of the coordinate axes `range`.
    pub fn coordinate_block(
        group: Arc<FiniteActionGroup<T>>,
        range: std::ops::Range<usize>,
    ) -> Result<Self, GroupError> {
        let n = group.dim();
        let basis = DMatrix::from_fn(n, range.len(), |i, j| if i == range.start + j { T::one() } else { T::zero() });
        Self::new(group, basis)
    }

    pub fn group(&self) -> &Arc<FiniteActionGroup<T>> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<T> {
        &self.basis
    }

    pub fn action(&self, g: usize) -> &DMatrix<T> {
        &self.action[g]
    }

    /// Trace of each element, one entry per conjugacy class.
    pub fn character(&self) -> Vec<T> {
        self.group.conjugacy_classes().iter().map(|class| self.action[class[0]].trace()).collect()
    }

    /// Character agreement per class, the working notion of isomorphism.
    pub fn same_class_as(&self, other: &Self) -> bool {
        if self.group.order() != other.group.order()
            || self.group.conjugacy_classes() != other.group.conjugacy_classes()
        {
            return false;
        }
        let tol = T::of(T::REP_TOL);
        self.character().iter().zip(other.character()).all(|(a, b)| (*a - b).abs() <= tol)
    }

    pub fn is_orientation_preserving(&self) -> bool {
        if self.dim() == 0 {
            return true;
        }
        self.action.iter().all(|m| m.determinant() > T::zero())
    }

    /// `ker(g - 1)` inside `W`, as a representation of the centralizer of `g`.
    pub fn fixed_subspace(&self, g: usize) -> Result<Self, GroupError> {
        if g >= self.group.order() {
            return Err(GroupError::NoSuchElement(g));
        }
        let centralizer = Arc::new(self.group.centralizer(g)?);
        let k = self.dim();
        if k == 0 {
            return Self::new(centralizer, self.basis.clone());
        }
        // averaging the powers of g gives the orthogonal projector onto the fixed space
        let order = self.group.element_order(g);
        let mut projector = DMatrix::<T>::zeros(k, k);
        let mut power = DMatrix::<T>::identity(k, k);
        for _ in 0..order {
            projector += &power;
            power = &self.action[g] * power;
        }
        projector /= T::of(order as f64);
        let basis = &self.basis * dominant_subspace(&projector);
        Self::new(centralizer, basis)
    }

    /// Same subspace, as a representation of a subgroup.
    pub fn restrict(&self, subgroup: Arc<FiniteActionGroup<T>>) -> Result<Self, GroupError> {
        Self::new(subgroup, self.basis.clone())
    }
}

/// Orthonormal eigenvectors of a (near-)projector with eigenvalue above 1/2.
pub(crate) fn dominant_subspace<T: Scalar>(projector: &DMatrix<T>) -> DMatrix<T> {
    let k = projector.nrows();
    let sym = (projector + projector.transpose()) * T::of(0.5);
    let eig = SymmetricEigen::new(sym);
    let half = T::of(0.5);
    let cols: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] > half).collect();
    let mut out = DMatrix::<T>::zeros(k, cols.len());
    for (j, &c) in cols.iter().enumerate() {
        out.set_column(j, &eig.eigenvectors.column(c));
    }
    out
}
