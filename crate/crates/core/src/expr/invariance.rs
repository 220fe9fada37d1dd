use nalgebra::DVector;

use super::Expression;
use crate::group::FiniteActionGroup;
use crate::Scalar;

/// Outcome of sampling `|f(g·x) - f(x)|`.
#[derive(Clone, Debug)]
pub struct InvarianceReport<T> {
    pub invariant: bool,
    pub worst_violation: T,
    pub worst_point: Option<DVector<T>>,
    /// Index of the offending generator in the group, or `None` for a lattice translation.
    pub worst_generator: Option<usize>,
    pub samples: usize,
    /// Sample points where `f` could not be evaluated.
    pub skipped: usize,
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    out
}

/// Halton points in the unit cube; dimensions past the prime table reuse
/// scrambled offsets of the last bases.
pub(crate) fn halton<T: Scalar>(index: u64, dim: usize) -> DVector<T> {
    DVector::from_fn(dim, |k, _| {
        let base = PRIMES[k % PRIMES.len()];
        let shift = (k / PRIMES.len()) as f64 * 0.618_033_988_749_894_8;
        T::of((radical_inverse(index + 1, base) + shift).fract())
    })
}

/// Checks `f ∘ g = f` for every generator at `samples` quasi-random points.
///
/// Points are drawn from `[0,1)ⁿ` on a torus chart and from `[-1,1]ⁿ`
/// otherwise. On a torus the unit translations are checked as well.
pub fn check_invariance<T: Scalar>(
    f: &Expression,
    group: &FiniteActionGroup<T>,
    samples: usize,
    tol: T,
) -> InvarianceReport<T> {
    let n = f.dim();
    let mut report = InvarianceReport {
        invariant: true,
        worst_violation: T::zero(),
        worst_point: None,
        worst_generator: None,
        samples,
        skipped: 0,
    };
    if group.dim() != n {
        report.invariant = false;
        report.worst_violation = T::of(f64::INFINITY);
        return report;
    }
    let two = T::of(2.0);
    for s in 0..samples {
        let u = halton::<T>(s as u64, n);
        let x = if group.lattice() { u } else { u.map(|v| v * two - T::one()) };
        let Ok(fx) = f.eval(&x) else {
            report.skipped += 1;
            continue;
        };
        let mut moves: Vec<(Option<usize>, DVector<T>)> =
            group.generators().iter().map(|&g| (Some(g), group.element(g).apply(&x))).collect();
        if group.lattice() {
            for k in 0..n {
                let mut y = x.clone();
                y[k] += T::one();
                moves.push((None, y));
            }
        }
        for (gen, y) in moves {
            let violation = match f.eval(&y) {
                Ok(fy) => (fy - fx).abs(),
                Err(_) => T::of(f64::INFINITY),
            };
            if violation > report.worst_violation || (report.worst_point.is_none() && violation > tol) {
                report.worst_violation = violation;
                report.worst_point = Some(x.clone());
                report.worst_generator = gen;
            }
        }
    }
    report.invariant = report.worst_violation <= tol;
    report
}
