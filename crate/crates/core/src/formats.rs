//! JSON documents: model files (a chart, its group and function) and
//! critical-data files (closed-form or computed critical-point data).
//!
//! Scalars may be JSON numbers or strings. Strings are read as exact rationals
//! (`"-1"`, `"1/3"`, `"0.25"`) when possible and otherwise as constant
//! expressions such as `"sqrt(3)/2"` or `"cos(2*pi/5)"`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::critical::{CriticalError, CriticalPointData, QuotientModel, SeedConfig, Tolerances};
use crate::expr::{ExprError, Expression};
use crate::group::{generate_group, AffineIsometry, ComplexStructure, GroupError, DEFAULT_MAX_ORDER};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid scalar '{text}': {reason}")]
    Scalar { text: String, reason: String },
    #[error("{what}: expected {expected} entries, found {found}")]
    Shape { what: String, expected: usize, found: usize },
    #[error("{context}: {source}")]
    Group { context: String, source: GroupError },
    #[error("{context}: {source}")]
    Critical { context: String, source: CriticalError },
    #[error("function: {0}")]
    Expr(#[from] ExprError),
}

/// A scalar as written in a file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Entry {
    fn from(v: f64) -> Self {
        Entry::Float(v)
    }
}

impl From<i64> for Entry {
    fn from(v: i64) -> Self {
        Entry::Int(v)
    }
}

impl From<Rational64> for Entry {
    fn from(v: Rational64) -> Self {
        if v.is_integer() {
            Entry::Int(v.to_integer())
        } else {
            Entry::Text(format!("{}/{}", v.numer(), v.denom()))
        }
    }
}

fn parse_decimal(s: &str) -> Option<Rational64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.')?;
    if int.is_empty() && frac.is_empty() || frac.len() > 15 {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: i64 = format!("{int}{frac}").parse().ok()?;
    let r = Rational64::new(digits, 10i64.checked_pow(frac.len() as u32)?);
    Some(if neg { -r } else { r })
}

impl Entry {
    /// Exact value, when the entry is an integer, a fraction or a finite decimal string.
    pub fn exact(&self) -> Option<Rational64> {
        match self {
            Entry::Int(i) => Some(Rational64::from_integer(*i)),
            Entry::Float(_) => None,
            Entry::Text(s) => {
                let s = s.trim();
                s.parse::<Rational64>().ok().or_else(|| parse_decimal(s))
            }
        }
    }

    pub fn value(&self) -> Result<f64, FormatError> {
        if let Some(r) = self.exact() {
            return Ok(r.to_f64().unwrap_or(f64::NAN));
        }
        match self {
            Entry::Float(v) if v.is_finite() => Ok(*v),
            Entry::Float(v) => Err(FormatError::Scalar { text: v.to_string(), reason: "not finite".into() }),
            Entry::Int(_) => unreachable!("integers are exact"),
            Entry::Text(s) => {
                let bad = |reason: String| FormatError::Scalar { text: s.clone(), reason };
                let e = Expression::parse(s, 0).map_err(|e| bad(e.to_string()))?;
                let v: f64 = e.eval(&DVector::zeros(0)).map_err(|e| bad(e.to_string()))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(bad("not finite".into()))
                }
            }
        }
    }
}

/// A square matrix as nested rows or as a flat row-major list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntry {
    Rows(Vec<Vec<Entry>>),
    Flat(Vec<Entry>),
}

impl MatrixEntry {
    pub fn from_matrix<T: Scalar>(m: &DMatrix<T>) -> Self {
        MatrixEntry::Rows(
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| number(m[(i, j)].as_f64())).collect()).collect(),
        )
    }

    pub fn from_exact(m: &DMatrix<Rational64>) -> Self {
        MatrixEntry::Rows((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| Entry::from(m[(i, j)])).collect()).collect())
    }

    fn entries(&self, n: usize, what: &str) -> Result<Vec<&Entry>, FormatError> {
        let flat: Vec<&Entry> = match self {
            MatrixEntry::Rows(rows) => {
                if rows.len() != n {
                    return Err(FormatError::Shape { what: format!("{what} rows"), expected: n, found: rows.len() });
                }
                for r in rows {
                    if r.len() != n {
                        return Err(FormatError::Shape { what: format!("{what} row"), expected: n, found: r.len() });
                    }
                }
                rows.iter().flatten().collect()
            }
            MatrixEntry::Flat(v) => v.iter().collect(),
        };
        if flat.len() != n * n {
            return Err(FormatError::Shape { what: what.to_string(), expected: n * n, found: flat.len() });
        }
        Ok(flat)
    }

    /// Exact `n × n` matrix, if every entry is exact.
    pub fn to_exact(&self, n: usize, what: &str) -> Result<Option<DMatrix<Rational64>>, FormatError> {
        let flat = self.entries(n, what)?;
        let exact: Option<Vec<Rational64>> = flat.iter().map(|e| e.exact()).collect();
        Ok(exact.map(|v| DMatrix::from_row_slice(n, n, &v)))
    }

    pub fn to_matrix<T: Scalar>(&self, n: usize, what: &str) -> Result<DMatrix<T>, FormatError> {
        let flat = self.entries(n, what)?;
        let vals = flat.iter().map(|e| e.value().map(T::of)).collect::<Result<Vec<T>, _>>()?;
        Ok(DMatrix::from_row_slice(n, n, &vals))
    }
}

/// Integral values are written as integers.
fn number(v: f64) -> Entry {
    let v = clean(v);
    if v.fract() == 0.0 && v.abs() < 1e15 {
        Entry::Int(v as i64)
    } else {
        Entry::Float(v)
    }
}

/// Rounds away float noise such as `6.1e-17` or `0.49999999999999994`.
fn clean(v: f64) -> f64 {
    let r = (v * 1e12).round() / 1e12;
    if (r - v).abs() < 1e-13 {
        r + 0.0
    } else {
        v
    }
}

fn vector_entries(v: &[Entry], n: usize, what: &str) -> Result<(Option<Vec<Rational64>>, Vec<f64>), FormatError> {
    if v.len() != n {
        return Err(FormatError::Shape { what: what.to_string(), expected: n, found: v.len() });
    }
    let exact = v.iter().map(|e| e.exact()).collect();
    let vals = v.iter().map(|e| e.value()).collect::<Result<_, _>>()?;
    Ok((exact, vals))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorEntry {
    pub linear: MatrixEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<Vec<Entry>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hessian_zero: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hessian_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    /// Half-width of the seed box on non-periodic charts.
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

/// A global-quotient chart: `dim`, the periodic flag, group generators and
/// the invariant function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    #[serde(default)]
    pub lattice: bool,
    #[serde(default)]
    pub generators: Vec<GeneratorEntry>,
    pub function: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complex_structure: Option<MatrixEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<SeedEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    fn generator<T: Scalar>(&self, k: usize, g: &GeneratorEntry) -> Result<AffineIsometry<T>, FormatError> {
        let n = self.dim;
        let what = format!("generators[{k}].linear");
        let zero = vec![Entry::Int(0); n];
        let t = g.translation.as_deref().unwrap_or(&zero);
        let (t_exact, t_vals) = vector_entries(t, n, &format!("generators[{k}].translation"))?;
        let group_err = |source| FormatError::Group { context: format!("generators[{k}]"), source };
        match (g.linear.to_exact(n, &what)?, t_exact) {
            (Some(a), Some(b)) => AffineIsometry::from_exact(a, DVector::from_vec(b)).map_err(group_err),
            _ => {
                let a = g.linear.to_matrix::<T>(n, &what)?;
                let b = DVector::from_iterator(n, t_vals.into_iter().map(T::of));
                AffineIsometry::new(a, b).map_err(group_err)
            }
        }
    }

    /// Builds and validates the chart: group closure, invariance of the
    /// function, compatibility of the complex structure.
    pub fn to_model<T: Scalar>(&self) -> Result<QuotientModel<T>, FormatError> {
        let gens = self
            .generators
            .iter()
            .enumerate()
            .map(|(k, g)| self.generator::<T>(k, g))
            .collect::<Result<Vec<_>, _>>()?;
        let group = generate_group(self.dim, &gens, self.lattice, self.max_order.unwrap_or(DEFAULT_MAX_ORDER))
            .map_err(|source| FormatError::Group { context: "group".into(), source })?;
        let function = Expression::parse(&self.function, self.dim)?;
        let crit = |context: &str| {
            let context = context.to_string();
            move |source| FormatError::Critical { context, source }
        };

        let mut tol = Tolerances::<T>::default();
        if let Some(o) = &self.tolerances {
            let set = |slot: &mut T, v: Option<f64>| {
                if let Some(v) = v {
                    *slot = T::of(v);
                }
            };
            set(&mut tol.newton, o.newton);
            set(&mut tol.hessian_zero, o.hessian_zero);
            set(&mut tol.hessian_floor, o.hessian_floor);
            set(&mut tol.orbit, o.orbit);
            set(&mut tol.invariance, o.invariance);
            set(&mut tol.split, o.split);
        }
        let mut seeds = SeedConfig::default();
        if let Some(s) = &self.seeds {
            seeds.grid = s.grid.unwrap_or(seeds.grid);
            seeds.random = s.random.unwrap_or(seeds.random);
            seeds.rng_seed = s.rng_seed.unwrap_or(seeds.rng_seed);
            seeds.half_width = s.half_width.unwrap_or(seeds.half_width);
        }
        let mut model = QuotientModel::new_unverified(Arc::new(group), function)
            .map_err(crit("model"))?
            .with_tolerances(tol)
            .with_seeds(seeds);
        model.verify_invariance().map_err(crit("function"))?;
        if let Some(r) = self.domain_radius {
            model = model.with_domain_radius(T::of(r));
        }
        if let Some(j) = &self.complex_structure {
            let j = j.to_matrix::<T>(self.dim, "complex_structure")?;
            let j = ComplexStructure::new(j)
                .map_err(|source| FormatError::Group { context: "complex_structure".into(), source })?;
            model = model.with_complex_structure(j).map_err(crit("complex_structure"))?;
        }
        Ok(model)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizerEntry {
    pub order: usize,
    /// Tangent-space matrices in the basis (index, coindex); when present they
    /// must be the block sums of the index and coindex actions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<MatrixEntry>>,
}

/// One critical point given by its stabilizer action on index and coindex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalDataEntry {
    pub location_label: String,
    pub value: Entry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Vec<Entry>>,
    pub index_dim: usize,
    pub coindex_dim: usize,
    pub stabilizer: StabilizerEntry,
    /// One matrix per stabilizer generator.
    pub index_action: Vec<MatrixEntry>,
    pub coindex_action: Vec<MatrixEntry>,
    /// On the tangent space in the basis (index, coindex).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complex_structure: Option<MatrixEntry>,
}

fn block_sum<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let (p, q) = (a.nrows(), b.nrows());
    let mut m = DMatrix::zeros(p + q, p + q);
    m.view_mut((0, 0), (p, p)).copy_from(a);
    m.view_mut((p, p), (q, q)).copy_from(b);
    m
}

impl CriticalDataEntry {
    /// Records a critical point. Matrices are written in the bases of its
    /// index and coindex representations.
    pub fn from_point<T: Scalar>(c: &CriticalPointData<T>) -> Self {
        let group = c.stabilizer();
        let gens = group.generators();
        let index_action = gens.iter().map(|&g| MatrixEntry::from_matrix(c.index_rep().action(g))).collect();
        let coindex_action = gens.iter().map(|&g| MatrixEntry::from_matrix(c.coindex_rep().action(g))).collect();
        let complex_structure = c.complex_structure().map(|j| {
            let k = c.tangent_dim();
            let mut basis = DMatrix::<T>::zeros(group.dim(), k);
            basis.columns_mut(0, c.index_dim()).copy_from(c.index_rep().basis());
            basis.columns_mut(c.index_dim(), c.coindex_dim()).copy_from(c.coindex_rep().basis());
            MatrixEntry::from_matrix(&(basis.transpose() * j.matrix() * &basis))
        });
        Self {
            location_label: c.label().to_string(),
            value: number(c.value().as_f64()),
            location: c.location().map(|x| x.iter().map(|v| number(v.as_f64())).collect()),
            index_dim: c.index_dim(),
            coindex_dim: c.coindex_dim(),
            stabilizer: StabilizerEntry { order: group.order(), generators: None },
            index_action,
            coindex_action,
            complex_structure,
        }
    }

    pub fn to_point<T: Scalar>(&self) -> Result<CriticalPointData<T>, FormatError> {
        let label = &self.location_label;
        let ctx = |what: &str| format!("{label}: {what}");
        let (p, q) = (self.index_dim, self.coindex_dim);
        let index = self
            .index_action
            .iter()
            .enumerate()
            .map(|(k, m)| m.to_matrix::<T>(p, &ctx(&format!("index_action[{k}]"))))
            .collect::<Result<Vec<_>, _>>()?;
        let coindex = self
            .coindex_action
            .iter()
            .enumerate()
            .map(|(k, m)| m.to_matrix::<T>(q, &ctx(&format!("coindex_action[{k}]"))))
            .collect::<Result<Vec<_>, _>>()?;
        if index.len() != coindex.len() {
            return Err(FormatError::Shape {
                what: ctx("coindex_action"),
                expected: index.len(),
                found: coindex.len(),
            });
        }
        if let Some(gens) = &self.stabilizer.generators {
            if gens.len() != index.len() {
                return Err(FormatError::Shape {
                    what: ctx("stabilizer.generators"),
                    expected: index.len(),
                    found: gens.len(),
                });
            }
            for (k, g) in gens.iter().enumerate() {
                let m = g.to_matrix::<T>(p + q, &ctx(&format!("stabilizer.generators[{k}]")))?;
                let residual = (m - block_sum(&index[k], &coindex[k])).amax();
                if residual > T::of(T::REP_TOL) {
                    return Err(FormatError::Group {
                        context: ctx(&format!("stabilizer.generators[{k}]")),
                        source: GroupError::NotInvariant { residual: residual.as_f64() },
                    });
                }
            }
        }
        let j = match &self.complex_structure {
            Some(m) => Some(m.to_matrix::<T>(p + q, &ctx("complex_structure"))?),
            None => None,
        };
        let value = T::of(self.value.value()?);
        let mut point = CriticalPointData::from_tangent_action(
            label.clone(),
            value,
            self.stabilizer.order,
            &index,
            &coindex,
            p,
            q,
            j,
        )
        .map_err(|source| FormatError::Critical { context: label.clone(), source })?;
        if let Some(loc) = &self.location {
            let vals = loc.iter().map(|e| e.value().map(T::of)).collect::<Result<Vec<T>, _>>()?;
            point = point.with_location(DVector::from_vec(vals));
        }
        Ok(point)
    }
}

/// A critical-data file: a top-level array of entries.
pub type CriticalDataFile = Vec<CriticalDataEntry>;

pub fn critical_data_from_json(text: &str) -> Result<CriticalDataFile, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn critical_data_to_json(data: &CriticalDataFile) -> String {
    serde_json::to_string_pretty(data).expect("critical data serializes")
}

pub fn points_from_data<T: Scalar>(data: &CriticalDataFile) -> Result<Vec<CriticalPointData<T>>, FormatError> {
    data.iter().map(|e| e.to_point()).collect()
}

pub fn data_from_points<T: Scalar>(points: &[CriticalPointData<T>]) -> CriticalDataFile {
    points.iter().map(CriticalDataEntry::from_point).collect()
}
