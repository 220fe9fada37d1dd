use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::CriticalError;
use crate::group::{
    generate_group, AffineIsometry, ComplexStructure, FiniteActionGroup, GroupError, RealRepresentation,
};
use crate::Scalar;

/// Everything the Morse polynomials need to know about one critical point.
///
/// The stabilizer acts linearly on an ambient space whose first `tangent_dim`
/// coordinates are the tangent space. Any further coordinates carry an
/// auxiliary rotation that makes a non-effective stabilizer faithful; they lie
/// outside both the index and the coindex.
#[derive(Clone, Debug)]
pub struct CriticalPointData<T: Scalar> {
    label: String,
    location: Option<DVector<T>>,
    value: T,
    hessian: Option<DMatrix<T>>,
    tangent_dim: usize,
    stabilizer: Arc<FiniteActionGroup<T>>,
    index_rep: RealRepresentation<T>,
    coindex_rep: RealRepresentation<T>,
    complex_structure: Option<ComplexStructure<T>>,
}

fn rotation<T: Scalar>(angle: f64) -> DMatrix<T> {
    let (s, c) = angle.sin_cos();
    DMatrix::from_row_slice(2, 2, &[T::of(c), T::of(-s), T::of(s), T::of(c)])
}

fn block_diag<T: Scalar>(blocks: &[&DMatrix<T>]) -> DMatrix<T> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), (b.nrows(), b.nrows())).copy_from(b);
        at += b.nrows();
    }
    out
}

impl<T: Scalar> CriticalPointData<T> {
    /// Assembles data computed on a chart. `index_rep` and `coindex_rep` must
    /// be representations of the same stabilizer spanning complementary
    /// subspaces of the tangent space.
    pub(crate) fn from_chart(
        label: String,
        location: DVector<T>,
        value: T,
        hessian: DMatrix<T>,
        index_rep: RealRepresentation<T>,
        coindex_rep: RealRepresentation<T>,
        complex_structure: Option<ComplexStructure<T>>,
    ) -> Self {
        let stabilizer = index_rep.group().clone();
        Self {
            label,
            location: Some(location),
            value,
            hessian: Some(hessian),
            tangent_dim: stabilizer.dim(),
            stabilizer,
            index_rep,
            coindex_rep,
            complex_structure,
        }
    }

    /// Builds a critical point from the stabilizer's action on the index and
    /// coindex, given per generator as square blocks.
    ///
    /// When the blocks generate a group smaller than `order` (the stabilizer
    /// acts non-effectively) and there is at most one generator, a rotation by
    /// `2π/order` on two auxiliary coordinates is appended to the generator.
    /// `complex_structure`, if given, lives on the tangent space with the index
    /// coordinates first.
    #[allow(clippy::too_many_arguments)]
    pub fn from_tangent_action(
        label: impl Into<String>,
        value: T,
        order: usize,
        index_action: &[DMatrix<T>],
        coindex_action: &[DMatrix<T>],
        index_dim: usize,
        coindex_dim: usize,
        complex_structure: Option<DMatrix<T>>,
    ) -> Result<Self, CriticalError> {
        if index_action.len() != coindex_action.len() {
            return Err(CriticalError::DimensionMismatch { expected: index_action.len(), found: coindex_action.len() });
        }
        for m in index_action {
            if m.nrows() != index_dim || m.ncols() != index_dim {
                return Err(CriticalError::DimensionMismatch { expected: index_dim, found: m.nrows() });
            }
        }
        for m in coindex_action {
            if m.nrows() != coindex_dim || m.ncols() != coindex_dim {
                return Err(CriticalError::DimensionMismatch { expected: coindex_dim, found: m.nrows() });
            }
        }
        let n = index_dim + coindex_dim;
        let tangent: Vec<DMatrix<T>> =
            index_action.iter().zip(coindex_action).map(|(a, b)| block_diag(&[a, b])).collect();
        let max_order = order.max(1);
        let generated = generate_group(n, &lift(&tangent)?, false, max_order)?;

        let group = if generated.order() == max_order {
            generated
        } else if tangent.len() <= 1 && max_order.is_multiple_of(generated.order()) {
            let base = tangent.first().cloned().unwrap_or_else(|| DMatrix::identity(n, n));
            let phantom = rotation::<T>(2.0 * std::f64::consts::PI / max_order as f64);
            let g = generate_group(n + 2, &lift(&[block_diag(&[&base, &phantom])])?, false, max_order)?;
            if g.order() != max_order {
                return Err(CriticalError::StabilizerOrderMismatch { declared: order, generated: g.order() });
            }
            g
        } else {
            return Err(CriticalError::StabilizerOrderMismatch { declared: order, generated: generated.order() });
        };
        let group = Arc::new(group);
        let ambient = group.dim();

        let axes = |start: usize, len: usize| {
            DMatrix::from_fn(ambient, len, |i, j| if i == start + j { T::one() } else { T::zero() })
        };
        let index_rep = RealRepresentation::new(group.clone(), axes(0, index_dim))?;
        let coindex_rep = RealRepresentation::new(group.clone(), axes(index_dim, coindex_dim))?;

        let complex_structure = match complex_structure {
            None => None,
            Some(j) => {
                if j.nrows() != n || j.ncols() != n {
                    return Err(CriticalError::DimensionMismatch { expected: n, found: j.nrows() });
                }
                let full = if ambient > n { block_diag(&[&j, &rotation::<T>(std::f64::consts::FRAC_PI_2)]) } else { j };
                Some(ComplexStructure::new(full)?)
            }
        };

        Ok(Self {
            label: label.into(),
            location: None,
            value,
            hessian: None,
            tangent_dim: n,
            stabilizer: group,
            index_rep,
            coindex_rep,
            complex_structure,
        })
    }

    /// Attaches chart coordinates to data that was entered directly.
    pub fn with_location(mut self, location: DVector<T>) -> Self {
        self.location = Some(location);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn location(&self) -> Option<&DVector<T>> {
        self.location.as_ref()
    }

    pub fn value(&self) -> T {
        self.value
    }

    pub fn hessian(&self) -> Option<&DMatrix<T>> {
        self.hessian.as_ref()
    }

    pub fn tangent_dim(&self) -> usize {
        self.tangent_dim
    }

    pub fn stabilizer(&self) -> &Arc<FiniteActionGroup<T>> {
        &self.stabilizer
    }

    pub fn index_rep(&self) -> &RealRepresentation<T> {
        &self.index_rep
    }

    pub fn coindex_rep(&self) -> &RealRepresentation<T> {
        &self.coindex_rep
    }

    pub fn index_dim(&self) -> usize {
        self.index_rep.dim()
    }

    pub fn coindex_dim(&self) -> usize {
        self.coindex_rep.dim()
    }

    /// Whether every stabilizer element preserves the orientation of the index.
    pub fn orientable(&self) -> bool {
        self.index_rep.is_orientation_preserving()
    }

    pub fn complex_structure(&self) -> Option<&ComplexStructure<T>> {
        self.complex_structure.as_ref()
    }

    /// The stabilizer's action on `index ⊕ coindex`.
    pub fn tangent_rep(&self) -> Result<RealRepresentation<T>, GroupError> {
        let basis =
            DMatrix::from_fn(self.stabilizer.dim(), self.tangent_dim, |i, j| if i == j { T::one() } else { T::zero() });
        RealRepresentation::new(self.stabilizer.clone(), basis)
    }

    /// Whether the stabilizer is trivial.
    pub fn has_trivial_stabilizer(&self) -> bool {
        self.stabilizer.is_trivial()
    }
}

fn lift<T: Scalar>(mats: &[DMatrix<T>]) -> Result<Vec<AffineIsometry<T>>, CriticalError> {
    Ok(mats.iter().map(|m| AffineIsometry::linear_map(m.clone())).collect::<Result<_, _>>()?)
}
