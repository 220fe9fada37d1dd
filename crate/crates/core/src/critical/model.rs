use std::sync::Arc;

use super::CriticalError;
use crate::expr::{check_invariance, Expression};
use crate::group::{ComplexStructure, FiniteActionGroup, GroupError};
use crate::Scalar;

/// Number of quasi-random points used to validate invariance at construction.
const INVARIANCE_SAMPLES: usize = 256;

#[derive(Clone, Debug)]
pub struct Tolerances<T> {
    /// Gradient norm accepted as critical.
    pub newton: T,
    /// Eigenvalues with `|λ| ≤ hessian_zero · max|λ|` count as zero.
    pub hessian_zero: T,
    /// Eigenvalues with `|λ| ≤ hessian_floor` count as zero too. Newton stops
    /// at `|∇f| ≈ newton` where a degenerate direction still shows a Hessian
    /// of order `√newton`, which the relative test alone cannot see when all
    /// eigenvalues are small together.
    pub hessian_floor: T,
    /// Distance identifying two chart points.
    pub orbit: T,
    /// Allowed `|f(g·x) - f(x)|` when validating the model.
    pub invariance: T,
    /// Allowed residual of the equivariant index/coindex split.
    pub split: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            newton: T::of(T::NEWTON_TOL),
            hessian_zero: T::of(1e-6),
            hessian_floor: T::of(T::NEWTON_TOL).sqrt() * T::of(10.0),
            orbit: T::of(T::ORBIT_TOL),
            invariance: T::of(T::ELEMENT_TOL),
            split: T::of(T::REP_TOL),
        }
    }
}

/// Where Newton's method is started.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedConfig {
    /// Points per axis of the regular grid (0 disables the grid).
    pub grid: usize,
    pub random: usize,
    pub rng_seed: u64,
    /// Seeds lie in `[-half_width, half_width]ⁿ` on non-periodic charts.
    pub half_width: f64,
}

impl Default for SeedConfig {
    fn default() -> Self {
        Self { grid: 6, random: 64, rng_seed: 0, half_width: 1.0 }
    }
}

/// A global-quotient chart `[U/G]`: a finite group acting on `Rⁿ` (or on `Rⁿ/Zⁿ`
/// when the group carries the lattice flag) and a `G`-invariant function.
#[derive(Clone, Debug)]
pub struct QuotientModel<T: Scalar> {
    group: Arc<FiniteActionGroup<T>>,
    function: Expression,
    complex_structure: Option<ComplexStructure<T>>,
    tolerances: Tolerances<T>,
    seeds: SeedConfig,
    domain_radius: T,
}

impl<T: Scalar> QuotientModel<T> {
    /// Validates that `function` is invariant under the group (and under unit
    /// translations on a torus chart).
    pub fn new(group: Arc<FiniteActionGroup<T>>, function: Expression) -> Result<Self, CriticalError> {
        let model = Self::new_unverified(group, function)?;
        model.verify_invariance()?;
        Ok(model)
    }

    /// Skips the invariance check. Only useful to demonstrate what goes wrong
    /// without it.
    pub fn new_unverified(group: Arc<FiniteActionGroup<T>>, function: Expression) -> Result<Self, CriticalError> {
        if group.dim() != function.dim() {
            return Err(CriticalError::DimensionMismatch { expected: group.dim(), found: function.dim() });
        }
        Ok(Self {
            group,
            function,
            complex_structure: None,
            tolerances: Tolerances::default(),
            seeds: SeedConfig::default(),
            domain_radius: T::of(10.0),
        })
    }

    pub fn verify_invariance(&self) -> Result<(), CriticalError> {
        let report = check_invariance(&self.function, &self.group, INVARIANCE_SAMPLES, self.tolerances.invariance);
        if report.invariant {
            Ok(())
        } else {
            Err(CriticalError::NotInvariant { violation: report.worst_violation.as_f64() })
        }
    }

    /// Attaches `J`, which must commute with the linear part of every element.
    pub fn with_complex_structure(mut self, j: ComplexStructure<T>) -> Result<Self, CriticalError> {
        if j.dim() != self.dim() {
            return Err(CriticalError::DimensionMismatch { expected: self.dim(), found: j.dim() });
        }
        let tol = T::of(T::REP_TOL);
        for g in self.group.elements() {
            let residual = j.commutator_residual(g.linear());
            if residual > tol {
                return Err(GroupError::ActionNotComplexLinear { residual: residual.as_f64() }.into());
            }
        }
        self.complex_structure = Some(j);
        Ok(self)
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances<T>) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn with_seeds(mut self, seeds: SeedConfig) -> Self {
        self.seeds = seeds;
        self
    }

    /// Flows and Newton runs on a non-periodic chart stop beyond this radius.
    pub fn with_domain_radius(mut self, radius: T) -> Self {
        self.domain_radius = radius;
        self
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    pub fn lattice(&self) -> bool {
        self.group.lattice()
    }

    pub fn group(&self) -> &Arc<FiniteActionGroup<T>> {
        &self.group
    }

    pub fn function(&self) -> &Expression {
        &self.function
    }

    pub fn complex_structure(&self) -> Option<&ComplexStructure<T>> {
        self.complex_structure.as_ref()
    }

    pub fn tolerances(&self) -> &Tolerances<T> {
        &self.tolerances
    }

    pub fn seeds(&self) -> &SeedConfig {
        &self.seeds
    }

    pub fn domain_radius(&self) -> T {
        self.domain_radius
    }
}
