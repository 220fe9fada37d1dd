//! Morse inequalities `M = P + (1 + t) R`, lacunary Betti extraction and the
//! rank bookkeeping for a filtration by relative groups.

use std::collections::BTreeMap;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::morse_poly::ExponentPolynomial;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InequalityError {
    #[error("polynomial has consecutive exponents {low} and {high}; Betti numbers are not determined")]
    NotLacunary { low: Rational64, high: Rational64 },
    #[error("exponent {0} is not an integer")]
    RationalExponents(Rational64),
    #[error("level {level} has rank in odd degree {degree}")]
    OddDegreePresent { level: usize, degree: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub morse: ExponentPolynomial,
    pub poincare: ExponentPolynomial,
    /// `R` with `M = P + (1 + t) R`, present iff the inequalities hold.
    pub remainder: Option<ExponentPolynomial>,
    pub consistent: bool,
    /// Alternating sums of `M` and `P` agree (per exponent class mod 1).
    pub euler_check: bool,
    /// Why the pair is inconsistent, if it is.
    pub reason: Option<String>,
}

/// Quotient of `d` by `(1 + t)` where `d` is given by its coefficients at
/// consecutive exponents `base, base + 1, …`. `Err` holds the nonzero remainder.
fn divide_by_one_plus_t(d: &[i128]) -> Result<Vec<i128>, i128> {
    let mut q = Vec::with_capacity(d.len());
    let mut carry = 0i128;
    for &c in d {
        carry = c - carry;
        q.push(carry);
    }
    match q.pop() {
        Some(0) | None => Ok(q),
        Some(r) => Err(r),
    }
}

/// Decides whether `M = P + (1 + t) R` for some `R` with non-negative integer
/// coefficients, and recovers `R`.
///
/// Exponents are grouped by their class mod 1 and each class is divided on its
/// own, since multiplication by `1 + t` never mixes classes.
pub fn check_inequality(morse: &ExponentPolynomial, poincare: &ExponentPolynomial) -> InequalityReport {
    let mut classes: BTreeMap<Rational64, BTreeMap<i64, i128>> = BTreeMap::new();
    for (sign, poly) in [(1i128, morse), (-1, poincare)] {
        for (e, c) in poly.terms() {
            let floor = e.floor();
            *classes.entry(e - floor).or_default().entry(floor.to_integer()).or_insert(0) += sign * c as i128;
        }
    }

    let mut remainder = ExponentPolynomial::zero();
    let mut reason = None;
    for (class, coeffs) in &classes {
        let lo = *coeffs.keys().next().unwrap();
        let hi = *coeffs.keys().next_back().unwrap();
        let dense: Vec<i128> = (lo..=hi).map(|k| coeffs.get(&k).copied().unwrap_or(0)).collect();
        match divide_by_one_plus_t(&dense) {
            Err(r) => {
                reason.get_or_insert_with(|| {
                    format!("M - P is not divisible by 1 + t (remainder {r} in class {class} mod 1)")
                });
            }
            Ok(q) => {
                for (k, c) in q.into_iter().enumerate() {
                    let e = *class + Rational64::from_integer(lo + k as i64);
                    if c < 0 {
                        reason.get_or_insert_with(|| format!("R has negative coefficient {c} at t^{e}"));
                    } else {
                        remainder.add_term(e, c as u64);
                    }
                }
            }
        }
    }
    let consistent = reason.is_none();
    InequalityReport {
        morse: morse.clone(),
        poincare: poincare.clone(),
        remainder: consistent.then_some(remainder),
        consistent,
        euler_check: morse.alternating_sums() == poincare.alternating_sums(),
        reason,
    }
}

/// First pair of exponents differing by exactly one, if any.
fn consecutive_pair(p: &ExponentPolynomial) -> Option<(Rational64, Rational64)> {
    p.terms().map(|(e, _)| e).find(|&e| p.coeff(e + 1) > 0).map(|e| (e, e + 1))
}

/// No two exponents `e` and `e + 1` both occur.
pub fn is_lacunary(p: &ExponentPolynomial) -> bool {
    consecutive_pair(p).is_none()
}

/// The coefficients of a lacunary integral polynomial, which are then forced
/// to be the Betti numbers: `[b₀, b₁, …]`.
pub fn betti_from_lacunary(p: &ExponentPolynomial) -> Result<Vec<u64>, InequalityError> {
    if let Some((low, high)) = consecutive_pair(p) {
        return Err(InequalityError::NotLacunary { low, high });
    }
    if let Some((e, _)) = p.terms().find(|(e, _)| !e.is_integer()) {
        return Err(InequalityError::RationalExponents(e));
    }
    Ok(p.integer_coefficients().unwrap_or_default())
}

/// Weak inequalities `Σ_{i≤k} (-1)^{k-i} bᵢ ≤ Σ_{i≤k} (-1)^{k-i} mᵢ` for every
/// `k`, on integral polynomials.
pub fn weak_inequalities_hold(morse: &ExponentPolynomial, poincare: &ExponentPolynomial) -> Option<bool> {
    let m = morse.integer_coefficients()?;
    let b = poincare.integer_coefficients()?;
    let top = m.len().max(b.len());
    let (mut sm, mut sb) = (0i128, 0i128);
    for k in 0..top {
        sm = m.get(k).copied().unwrap_or(0) as i128 - sm;
        sb = b.get(k).copied().unwrap_or(0) as i128 - sb;
        if sb > sm {
            return Some(false);
        }
    }
    Some(true)
}

/// Relative rank contributed by attaching a cell at a critical point:
/// rank one in degree `ind_dim` when orientable, nothing otherwise.
pub fn cell_rank(ind_dim: u32, orientable: bool) -> BTreeMap<u32, u64> {
    if orientable {
        BTreeMap::from([(ind_dim, 1)])
    } else {
        BTreeMap::new()
    }
}

/// Relative ranks after replacing an isolated `C²/±1` point whose index has
/// real dimension `v_dim` by its crepant resolution: one generator in degree 2,
/// plus one in degree `v_dim` when `v_dim` is even.
pub fn resolved_cell_rank(v_dim: u32) -> BTreeMap<u32, u64> {
    let mut out = BTreeMap::from([(2, 1)]);
    if v_dim.is_multiple_of(2) {
        *out.entry(v_dim).or_insert(0) += 1;
    }
    out
}

/// Free ranks of `H_*(K^{b_i}, K^{b_{i-1}})` for one step of a filtration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionLevel {
    pub level: usize,
    pub relative_ranks: BTreeMap<u32, u64>,
}

impl ResolutionLevel {
    pub fn new(level: usize, relative_ranks: BTreeMap<u32, u64>) -> Self {
        Self { level, relative_ranks }
    }

    /// Degreewise sum with more ranks.
    pub fn absorb(&mut self, ranks: &BTreeMap<u32, u64>) {
        for (&d, &r) in ranks {
            *self.relative_ranks.entry(d).or_insert(0) += r;
        }
    }
}

/// Total ranks `[r₀, r₁, …]` of the filtered space.
///
/// When every relative group sits in even degrees, all connecting maps of the
/// long exact sequences vanish and the ranks simply add up. Any odd degree is
/// rejected because the sum would then only be an upper bound.
pub fn assemble_even_ranks(levels: &[ResolutionLevel]) -> Result<Vec<u64>, InequalityError> {
    let mut total: BTreeMap<u32, u64> = BTreeMap::new();
    for lvl in levels {
        for (&d, &r) in &lvl.relative_ranks {
            if r == 0 {
                continue;
            }
            if d % 2 == 1 {
                return Err(InequalityError::OddDegreePresent { level: lvl.level, degree: d });
            }
            *total.entry(d).or_insert(0) += r;
        }
    }
    let Some(&top) = total.keys().next_back() else {
        return Ok(Vec::new());
    };
    Ok((0..=top).map(|d| total.get(&d).copied().unwrap_or(0)).collect())
}

/// `Σ rᵢ tⁱ` for a rank vector.
pub fn rank_polynomial(ranks: &[u64]) -> ExponentPolynomial {
    ExponentPolynomial::from_coefficients(ranks)
}

impl InequalityReport {
    /// Consistent with `R = 0`.
    pub fn remainder_is_zero(&self) -> bool {
        self.remainder.as_ref().is_some_and(|r| r.is_zero())
    }
}
