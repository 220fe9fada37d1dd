//! Inertia sectors and the three Morse polynomials built from critical-point data.

mod polynomial;

pub use polynomial::{ExponentPolynomial, PolynomialParseError};

use num_rational::Rational64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::critical::CriticalPointData;
use crate::group::{age, ComplexStructure, GroupError};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MorsePolyError {
    #[error("sector ({point}, class {class}) has no age; declare a complex structure")]
    MissingComplexStructure { point: String, class: usize },
    #[error("critical point {point}: {source}")]
    Group { point: String, source: GroupError },
}

/// One pair `(c, (g))`: a critical point and a conjugacy class of its stabilizer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InertiaSectorDatum {
    /// Position of the base point in the input sequence.
    pub point: usize,
    pub label: String,
    /// Index of the class among the stabilizer's conjugacy classes; 0 is the identity.
    pub class: usize,
    /// Element of the stabilizer representing the class.
    pub class_rep: usize,
    pub class_size: usize,
    pub element_order: usize,
    pub ind_fixed_dim: usize,
    pub coind_fixed_dim: usize,
    #[serde(serialize_with = "serialize_age")]
    pub age: Option<Rational64>,
    /// The centralizer preserves the orientation of the fixed part of the index.
    pub orientable: bool,
}

fn serialize_age<S: serde::Serializer>(age: &Option<Rational64>, s: S) -> Result<S::Ok, S::Error> {
    match age {
        None => s.serialize_none(),
        Some(a) if a.is_integer() => s.serialize_str(&a.to_integer().to_string()),
        Some(a) => s.serialize_str(&format!("{}/{}", a.numer(), a.denom())),
    }
}

fn sectors_of<T: Scalar>(
    position: usize,
    point: &CriticalPointData<T>,
    j: Option<&ComplexStructure<T>>,
) -> Result<Vec<InertiaSectorDatum>, MorsePolyError> {
    let wrap = |source: GroupError| MorsePolyError::Group { point: point.label().to_string(), source };
    let group = point.stabilizer();
    let j = j.or(point.complex_structure());
    let tangent = match j {
        Some(_) => Some(point.tangent_rep().map_err(wrap)?),
        None => None,
    };
    let mut out = Vec::with_capacity(group.conjugacy_classes().len());
    for (class, members) in group.conjugacy_classes().iter().enumerate() {
        let g = members[0];
        let ind = point.index_rep().fixed_subspace(g).map_err(wrap)?;
        let coind = point.coindex_rep().fixed_subspace(g).map_err(wrap)?;
        let age = match (j, &tangent) {
            (Some(j), Some(rep)) => Some(age(g, j, rep).map_err(wrap)?),
            _ => None,
        };
        out.push(InertiaSectorDatum {
            point: position,
            label: point.label().to_string(),
            class,
            class_rep: g,
            class_size: members.len(),
            element_order: group.element_order(g),
            ind_fixed_dim: ind.dim(),
            coind_fixed_dim: coind.dim(),
            age,
            orientable: ind.is_orientation_preserving(),
        });
    }
    Ok(out)
}

/// One datum per critical point and conjugacy class of its stabilizer.
///
/// Ages are computed against `j` when given, otherwise against each point's own
/// complex structure; points with neither get `age: None`.
pub fn inertia_sectors<T: Scalar>(
    points: &[CriticalPointData<T>],
    j: Option<&ComplexStructure<T>>,
) -> Result<Vec<InertiaSectorDatum>, MorsePolyError> {
    let per_point: Vec<Result<Vec<InertiaSectorDatum>, MorsePolyError>> =
        points.par_iter().enumerate().map(|(i, p)| sectors_of(i, p, j)).collect();
    let mut out = Vec::new();
    for r in per_point {
        out.extend(r?);
    }
    Ok(out)
}

/// `Σ t^{dim ind c}` over orientable critical points.
pub fn morse_polynomial<T: Scalar>(points: &[CriticalPointData<T>]) -> ExponentPolynomial {
    let mut p = ExponentPolynomial::zero();
    for c in points.iter().filter(|c| c.orientable()) {
        p.add_term(Rational64::from_integer(c.index_dim() as i64), 1);
    }
    p
}

/// `Σ t^{dim (ind c)^g}` over orientable sectors.
pub fn inertia_morse_polynomial(sectors: &[InertiaSectorDatum]) -> ExponentPolynomial {
    let mut p = ExponentPolynomial::zero();
    for s in sectors.iter().filter(|s| s.orientable) {
        p.add_term(Rational64::from_integer(s.ind_fixed_dim as i64), 1);
    }
    p
}

/// `Σ t^{dim (ind c)^g + 2 age(g)}` over orientable sectors.
pub fn orbifold_morse_polynomial(sectors: &[InertiaSectorDatum]) -> Result<ExponentPolynomial, MorsePolyError> {
    let mut p = ExponentPolynomial::zero();
    for s in sectors {
        let age =
            s.age.ok_or_else(|| MorsePolyError::MissingComplexStructure { point: s.label.clone(), class: s.class })?;
        if s.orientable {
            p.add_term(Rational64::from_integer(s.ind_fixed_dim as i64) + age * 2, 1);
        }
    }
    Ok(p)
}

/// True iff every stabilizer is trivial.
///
/// Only meaningful for functions with compact sublevel sets, which the caller
/// vouches for.
pub fn representability_certificate<T: Scalar>(points: &[CriticalPointData<T>]) -> bool {
    points.iter().all(|c| c.has_trivial_stabilizer())
}
