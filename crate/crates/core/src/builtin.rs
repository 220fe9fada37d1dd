//! Worked examples as fixture files: the Kümmer quotient `[T⁴/±1]`, weighted
//! projective spaces (teardrop included) and the rank count for the
//! resolution of the Kümmer surface.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::critical::{CriticalPointData, QuotientModel, SeedConfig};
use crate::formats::{
    CriticalDataEntry, CriticalDataFile, Entry, GeneratorEntry, MatrixEntry, ModelFile, SeedEntry, StabilizerEntry,
};
use crate::inequalities::{cell_rank, resolved_cell_rank, ResolutionLevel};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuiltinError {
    #[error("weights must be positive integers, got {0:?}")]
    InvalidWeights(Vec<u64>),
}

/// Which example to generate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExampleSpec {
    WeightedProjective(Vec<u64>),
    Kummer,
    K3Resolution,
    Teardrop,
}

/// Generated file contents.
#[derive(Clone, Debug, PartialEq)]
pub enum Fixture {
    Model(Box<ModelFile>),
    CriticalData(CriticalDataFile),
    Levels(Vec<ResolutionLevel>),
}

impl ExampleSpec {
    pub fn generate(&self) -> Result<Fixture, BuiltinError> {
        Ok(match self {
            ExampleSpec::WeightedProjective(w) => Fixture::CriticalData(weighted_projective_data(w)?),
            ExampleSpec::Kummer => Fixture::Model(Box::new(kummer_model())),
            ExampleSpec::K3Resolution => Fixture::Levels(k3_resolution_levels()),
            ExampleSpec::Teardrop => Fixture::CriticalData(teardrop_data()),
        })
    }
}

pub const KUMMER_FUNCTION: &str = "cos(2*pi*x1) + cos(2*pi*x2) + cos(2*pi*x3) + cos(2*pi*x4)";

fn int_matrix(m: &DMatrix<i64>) -> MatrixEntry {
    MatrixEntry::Rows((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| Entry::Int(m[(i, j)])).collect()).collect())
}

fn standard_j(n: usize) -> DMatrix<i64> {
    let mut j = DMatrix::zeros(n, n);
    for k in 0..n / 2 {
        j[(2 * k, 2 * k + 1)] = -1;
        j[(2 * k + 1, 2 * k)] = 1;
    }
    j
}

/// `[T⁴/±1]` with `f = Σ cos(2π xᵢ)` and the standard complex structure.
pub fn kummer_model() -> ModelFile {
    ModelFile {
        dim: 4,
        lattice: true,
        generators: vec![GeneratorEntry { linear: int_matrix(&(-DMatrix::identity(4, 4))), translation: None }],
        function: KUMMER_FUNCTION.to_string(),
        complex_structure: Some(int_matrix(&standard_j(4))),
        tolerances: None,
        seeds: Some(SeedEntry { grid: Some(4), random: Some(32), rng_seed: Some(0), half_width: None }),
        domain_radius: None,
        max_order: None,
    }
}

/// [`kummer_model`] as a validated chart.
pub fn kummer_quotient<T: Scalar>() -> QuotientModel<T> {
    kummer_model().to_model().expect("builtin Kümmer model is valid")
}

/// Same chart with an explicit seed configuration.
pub fn kummer_quotient_with_seeds<T: Scalar>(seeds: SeedConfig) -> QuotientModel<T> {
    kummer_quotient().with_seeds(seeds)
}

/// Closed-form critical data of the Kümmer function: one point per subset of
/// half coordinates, index `-1` on the `4 - s` integer coordinates.
pub fn kummer_critical_data() -> CriticalDataFile {
    (0..16u32)
        .map(|mask| {
            let s = mask.count_ones() as usize;
            let coords: Vec<Entry> =
                (0..4).map(|i| if mask >> i & 1 == 1 { Entry::Text("1/2".into()) } else { Entry::Int(0) }).collect();
            let label = format!(
                "({})",
                (0..4).map(|i| if mask >> i & 1 == 1 { "0.5" } else { "0" }).collect::<Vec<_>>().join(", ")
            );
            CriticalDataEntry {
                location_label: label,
                value: Entry::Int(4 - 2 * s as i64),
                location: Some(coords),
                index_dim: 4 - s,
                coindex_dim: s,
                stabilizer: StabilizerEntry { order: 2, generators: None },
                index_action: vec![int_matrix(&(-DMatrix::identity(4 - s, 4 - s)))],
                coindex_action: vec![int_matrix(&(-DMatrix::identity(s, s)))],
                complex_structure: Some(int_matrix(&standard_j(4))),
            }
        })
        .collect()
}

fn rotation_blocks(angles: &[f64]) -> MatrixEntry {
    let n = 2 * angles.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (k, a) in angles.iter().enumerate() {
        let (s, c) = a.sin_cos();
        m[(2 * k, 2 * k)] = c;
        m[(2 * k, 2 * k + 1)] = -s;
        m[(2 * k + 1, 2 * k)] = s;
        m[(2 * k + 1, 2 * k + 1)] = c;
    }
    MatrixEntry::from_matrix(&m)
}

/// Critical data of `Σ k|z_k|²` on the weighted projective space with weights
/// `q₀, …, qₙ`: at `cᵢ` the stabilizer is `Z_{qᵢ}`, acting on the `j`-th
/// complex line by `exp(2πi q_j/qᵢ)`; lines `j < i` form the index.
pub fn weighted_projective_data(weights: &[u64]) -> Result<CriticalDataFile, BuiltinError> {
    if weights.is_empty() || weights.contains(&0) {
        return Err(BuiltinError::InvalidWeights(weights.to_vec()));
    }
    let n = weights.len() - 1;
    Ok((0..=n)
        .map(|i| {
            let qi = weights[i];
            let angle = |j: usize| 2.0 * PI * ((weights[j] % qi) as f64) / qi as f64;
            let below: Vec<f64> = (0..i).map(angle).collect();
            let above: Vec<f64> = (i + 1..=n).map(angle).collect();
            CriticalDataEntry {
                location_label: format!("c{i}"),
                value: Entry::Int(i as i64),
                location: None,
                index_dim: 2 * i,
                coindex_dim: 2 * (n - i),
                stabilizer: StabilizerEntry { order: qi as usize, generators: None },
                index_action: vec![rotation_blocks(&below)],
                coindex_action: vec![rotation_blocks(&above)],
                complex_structure: Some(int_matrix(&standard_j(2 * n))),
            }
        })
        .collect())
}

/// The teardrop, weights `(1, 2)`.
pub fn teardrop_data() -> CriticalDataFile {
    weighted_projective_data(&[1, 2]).expect("valid weights")
}

/// Groups critical points into filtration levels by index dimension. Points
/// with a nontrivial stabilizer are replaced by their resolution, the others
/// contribute an ordinary cell.
pub fn resolution_levels<T: Scalar>(points: &[CriticalPointData<T>]) -> Vec<ResolutionLevel> {
    let mut levels: BTreeMap<usize, ResolutionLevel> = BTreeMap::new();
    for c in points {
        let i = c.index_dim();
        let ranks =
            if c.has_trivial_stabilizer() { cell_rank(i as u32, c.orientable()) } else { resolved_cell_rank(i as u32) };
        levels.entry(i).or_insert_with(|| ResolutionLevel::new(i, BTreeMap::new())).absorb(&ranks);
    }
    levels.into_values().collect()
}

/// Five levels `i = 0..4`: `C(4,i)` generators in degree 2 plus `C(4,i)` in
/// degree `i` when `i` is even.
pub fn k3_resolution_levels() -> Vec<ResolutionLevel> {
    let points = crate::formats::points_from_data::<f64>(&kummer_critical_data()).expect("builtin data is valid");
    resolution_levels(&points)
}
