use nalgebra::{DMatrix, DVector};
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::Zero;

use super::GroupError;
use crate::Scalar;

/// Rational form of an affine map, kept alongside the float form when every
/// entry is known exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactAffine {
    pub linear: DMatrix<Rational64>,
    pub translation: DVector<Rational64>,
}

/// `x ↦ linear · x + translation`.
#[derive(Clone, Debug)]
pub struct AffineIsometry<T: Scalar> {
    linear: DMatrix<T>,
    translation: DVector<T>,
    exact: Option<ExactAffine>,
}

fn to_float<T: Scalar>(q: &Rational64) -> T {
    T::of(*q.numer() as f64 / *q.denom() as f64)
}

fn frac(q: &Rational64) -> Rational64 {
    q - q.floor()
}

impl<T: Scalar> AffineIsometry<T> {
    pub fn new(linear: DMatrix<T>, translation: DVector<T>) -> Result<Self, GroupError> {
        if !linear.is_square() {
            return Err(GroupError::DimensionMismatch { expected: linear.nrows(), found: linear.ncols() });
        }
        if translation.len() != linear.nrows() {
            return Err(GroupError::DimensionMismatch { expected: linear.nrows(), found: translation.len() });
        }
        Ok(Self { linear, translation, exact: None })
    }

    pub fn from_exact(linear: DMatrix<Rational64>, translation: DVector<Rational64>) -> Result<Self, GroupError> {
        let float_linear = linear.map(|q| to_float::<T>(&q));
        let float_translation = translation.map(|q| to_float::<T>(&q));
        let mut iso = Self::new(float_linear, float_translation)?;
        iso.exact = Some(ExactAffine { linear, translation });
        Ok(iso)
    }

    pub fn linear_map(linear: DMatrix<T>) -> Result<Self, GroupError> {
        let n = linear.nrows();
        Self::new(linear, DVector::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_exact(DMatrix::identity(n, n), DVector::zeros(n)).expect("square")
    }

    pub fn dim(&self) -> usize {
        self.linear.nrows()
    }

    pub fn linear(&self) -> &DMatrix<T> {
        &self.linear
    }

    pub fn translation(&self) -> &DVector<T> {
        &self.translation
    }

    pub fn exact(&self) -> Option<&ExactAffine> {
        self.exact.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn apply(&self, x: &DVector<T>) -> DVector<T> {
        &self.linear * x + &self.translation
    }

    /// `self ∘ rhs`, i.e. apply `rhs` first.
    pub fn compose(&self, rhs: &Self) -> Self {
        let linear = &self.linear * &rhs.linear;
        let translation = &self.linear * &rhs.translation + &self.translation;
        let exact = match (&self.exact, &rhs.exact) {
            (Some(a), Some(b)) => Some(ExactAffine {
                linear: &a.linear * &b.linear,
                translation: &a.linear * &b.translation + &a.translation,
            }),
            _ => None,
        };
        Self { linear, translation, exact }
    }

    pub fn inverse(&self) -> Self {
        let linear = self.linear.transpose();
        let translation = -(&linear * &self.translation);
        let exact = self.exact.as_ref().map(|e| {
            let l = e.linear.transpose();
            let t = -(&l * &e.translation);
            ExactAffine { linear: l, translation: t }
        });
        Self { linear, translation, exact }
    }

    /// Translation reduced into `[0, 1)` when acting on the torus.
    pub fn reduced(&self, lattice: bool) -> Self {
        if !lattice {
            return self.clone();
        }
        let tol = T::of(T::ELEMENT_TOL);
        let translation = self.translation.map(|v| {
            let r = v - v.floor();
            if T::one() - r < tol {
                T::zero()
            } else {
                r
            }
        });
        let exact = self
            .exact
            .as_ref()
            .map(|e| ExactAffine { linear: e.linear.clone(), translation: e.translation.map(|q| frac(&q)) });
        Self { linear: self.linear.clone(), translation, exact }
    }

    /// Largest entry of `|AᵀA - I|`; exactly zero for exact orthogonal matrices.
    pub fn orthogonality_defect(&self) -> f64 {
        if let Some(e) = &self.exact {
            let n = e.linear.nrows();
            let gram = e.linear.transpose() * &e.linear;
            if gram == DMatrix::identity(n, n) {
                return 0.0;
            }
        }
        let n = self.dim();
        let gram = self.linear.transpose() * &self.linear - DMatrix::<T>::identity(n, n);
        gram.amax().as_f64()
    }

    pub fn is_orthogonal(&self) -> bool {
        match &self.exact {
            Some(_) => self.orthogonality_defect() == 0.0,
            None => self.orthogonality_defect() <= T::ELEMENT_TOL,
        }
    }

    /// Integer linear part, so that `Zⁿ` is mapped to itself.
    pub fn preserves_integer_lattice(&self) -> bool {
        match &self.exact {
            Some(e) => e.linear.iter().all(|q| q.is_integer()),
            None => self.linear.iter().all(|v| (*v - v.round()).abs() <= T::of(T::ELEMENT_TOL)),
        }
    }

    pub fn determinant(&self) -> T {
        self.linear.determinant()
    }

    /// Equality as maps of the chart (modulo `Zⁿ` when `lattice` is set).
    pub fn same_as(&self, other: &Self, lattice: bool) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            if a.linear != b.linear {
                return false;
            }
            return a.translation.iter().zip(b.translation.iter()).all(|(x, y)| {
                let d = x - y;
                if lattice {
                    d.is_integer()
                } else {
                    d.is_zero()
                }
            });
        }
        let tol = T::of(T::ELEMENT_TOL);
        if (&self.linear - &other.linear).amax() > tol {
            return false;
        }
        super::torus::displacement(&self.translation, &other.translation, lattice).amax() <= tol
    }

    /// Hash key consistent with [`same_as`](Self::same_as) for canonical (reduced) elements.
    pub(crate) fn key(&self) -> Vec<i64> {
        if let Some(e) = &self.exact {
            let mut key = Vec::with_capacity(2 * (e.linear.len() + e.translation.len()) + 1);
            key.push(1);
            for q in e.linear.iter().chain(e.translation.iter()) {
                key.push(*q.numer());
                key.push(*q.denom());
            }
            return key;
        }
        let scale = 1e6;
        let mut key = vec![0];
        key.extend(self.linear.iter().map(|v| (v.as_f64() * scale).round() as i64));
        key.extend(self.translation.iter().map(|v| {
            let r = (v.as_f64() * scale).round() as i64;
            // a translation of 1.0 and one of 0.0 are the same on the torus
            r.mod_floor(&(scale as i64))
        }));
        key
    }
}
