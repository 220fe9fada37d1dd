use std::cmp::Ordering;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{CriticalError, QuotientModel};
use crate::group::torus::{distance, lex_cmp, wrap};
use crate::group::FiniteActionGroup;
use crate::Scalar;

const MAX_ITERATIONS: usize = 50;
const MAX_HALVINGS: usize = 40;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeedStats {
    pub seeds: usize,
    pub converged: usize,
    pub singular: usize,
    pub diverged: usize,
}

/// Converged Newton limits, deduplicated upstairs (not yet modulo the group).
#[derive(Clone, Debug)]
pub struct CriticalSearch<T: Scalar> {
    pub points: Vec<DVector<T>>,
    pub stats: SeedStats,
}

enum Outcome<T: Scalar> {
    Converged(DVector<T>),
    Singular,
    Diverged,
}

pub(crate) fn canonical<T: Scalar>(model: &QuotientModel<T>, x: &DVector<T>) -> DVector<T> {
    wrap(x, model.lattice(), model.tolerances().orbit)
}

fn seed_points<T: Scalar>(model: &QuotientModel<T>) -> Vec<DVector<T>> {
    let n = model.dim();
    let cfg = model.seeds();
    let mut seeds = Vec::new();
    if cfg.grid > 0 {
        let total = cfg.grid.checked_pow(n as u32).unwrap_or(usize::MAX);
        for mut k in 0..total {
            let x = DVector::from_fn(n, |_, _| {
                let i = k % cfg.grid;
                k /= cfg.grid;
                let c = if model.lattice() {
                    i as f64 / cfg.grid as f64
                } else {
                    -cfg.half_width + (i as f64 + 0.5) * 2.0 * cfg.half_width / cfg.grid as f64
                };
                T::of(c)
            });
            seeds.push(x);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    for _ in 0..cfg.random {
        seeds.push(DVector::from_fn(n, |_, _| {
            let u: f64 = rng.random();
            if model.lattice() {
                T::of(u)
            } else {
                T::of((2.0 * u - 1.0) * cfg.half_width)
            }
        }));
    }
    seeds
}

/// Damped Newton iteration on `∇f` with the Hessian as Jacobian.
fn newton<T: Scalar>(model: &QuotientModel<T>, seed: &DVector<T>) -> Outcome<T> {
    let f = model.function();
    let tol = model.tolerances().newton;
    let mut x = seed.clone();
    for _ in 0..MAX_ITERATIONS {
        let Ok((_, grad, hess)) = f.value_gradient_hessian(&x) else {
            return Outcome::Diverged;
        };
        let gnorm = grad.norm();
        if gnorm <= tol {
            return Outcome::Converged(canonical(model, &x));
        }
        let Some(step) = hess.lu().solve(&(-&grad)) else {
            return Outcome::Singular;
        };
        if step.iter().any(|v| !v.is_finite()) {
            return Outcome::Singular;
        }
        let mut lambda = T::one();
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = &x + &step * lambda;
            if let Ok(g) = f.gradient(&trial) {
                if g.norm() < gnorm {
                    accepted = Some(trial);
                    break;
                }
            }
            lambda *= T::of(0.5);
        }
        let Some(next) = accepted else {
            return Outcome::Diverged;
        };
        x = canonical(model, &next);
        if !model.lattice() && x.norm() > model.domain_radius() {
            return Outcome::Diverged;
        }
    }
    match f.gradient(&x) {
        Ok(g) if g.norm() <= tol => Outcome::Converged(canonical(model, &x)),
        _ => Outcome::Diverged,
    }
}

/// Newton from every grid and random seed; converged limits are deduplicated by
/// plain (torus) distance. Completeness is not guaranteed: the statistics say
/// how many seeds were lost.
pub fn find_critical_points<T: Scalar>(model: &QuotientModel<T>) -> Result<CriticalSearch<T>, CriticalError> {
    let seeds = seed_points(model);
    if seeds.is_empty() {
        return Err(CriticalError::NoSeeds);
    }
    for s in &seeds {
        match model.function().eval(s) {
            Ok(v) if v.is_finite() => {}
            _ => return Err(CriticalError::NonFiniteFunctionValue { point: s.iter().map(|v| v.as_f64()).collect() }),
        }
    }
    let outcomes: Vec<Outcome<T>> = seeds.par_iter().map(|s| newton(model, s)).collect();

    let mut stats = SeedStats { seeds: seeds.len(), ..Default::default() };
    let mut found = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Converged(x) => {
                stats.converged += 1;
                found.push(x);
            }
            Outcome::Singular => stats.singular += 1,
            Outcome::Diverged => stats.diverged += 1,
        }
    }
    found.sort_by(lex_cmp);
    let tol = model.tolerances().orbit;
    let mut points: Vec<DVector<T>> = Vec::new();
    for x in found {
        if points.iter().all(|p| distance(p, &x, model.lattice()) >= tol) {
            points.push(x);
        }
    }
    Ok(CriticalSearch { points, stats })
}

/// Elements moving `x` by less than the orbit tolerance.
pub fn stabilizer_of<T: Scalar>(
    model: &QuotientModel<T>,
    x: &DVector<T>,
) -> Result<FiniteActionGroup<T>, CriticalError> {
    let group = model.group();
    let tol = model.tolerances().orbit;
    let members: Vec<usize> =
        (0..group.order()).filter(|&g| distance(&group.element(g).apply(x), x, model.lattice()) < tol).collect();
    Ok(group.subgroup(&members)?)
}

/// `min_g d(g·a, b)`.
pub fn orbit_distance<T: Scalar>(model: &QuotientModel<T>, a: &DVector<T>, b: &DVector<T>) -> T {
    model
        .group()
        .elements()
        .iter()
        .map(|g| distance(&g.apply(a), b, model.lattice()))
        .fold(T::of(f64::INFINITY), |m, d| if d < m { d } else { m })
}

/// Lexicographically smallest point of the orbit of `x`.
pub fn orbit_representative<T: Scalar>(model: &QuotientModel<T>, x: &DVector<T>) -> DVector<T> {
    model
        .group()
        .elements()
        .iter()
        .map(|g| canonical(model, &g.apply(x)))
        .min_by(lex_cmp)
        .expect("group contains the identity")
}

/// One representative per group orbit, sorted lexicographically.
pub fn orbit_dedup<T: Scalar>(model: &QuotientModel<T>, points: &[DVector<T>]) -> Vec<DVector<T>> {
    let tol = model.tolerances().orbit;
    let mut reps: Vec<DVector<T>> = points.iter().map(|p| orbit_representative(model, p)).collect();
    // coordinates closer than the orbit tolerance compare equal
    reps.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .find(|(x, y)| (**x - **y).abs() >= tol)
            .map_or(Ordering::Equal, |(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
    });
    let mut out: Vec<DVector<T>> = Vec::new();
    for r in reps {
        if out.iter().all(|k| orbit_distance(model, &r, k) >= tol) {
            out.push(r);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::kummer_quotient;
    use crate::critical::SeedConfig;
    use crate::expr::Expression;
    use crate::group::{generate_group, AffineIsometry};
    use nalgebra::DMatrix;
    use std::sync::Arc;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_vec(x.to_vec())
    }

    #[test]
    fn kummer_grid_finds_the_sixteen_half_integer_points() {
        let model =
            kummer_quotient::<f64>().with_seeds(SeedConfig { grid: 4, random: 0, rng_seed: 0, half_width: 1.0 });
        let search = find_critical_points(&model).unwrap();
        assert_eq!(search.points.len(), 16);
        for p in &search.points {
            for c in p.iter() {
                let twice = 2.0 * c;
                assert!((twice - twice.round()).abs() < 1e-9, "{p}");
            }
        }
    }

    #[test]
    fn torus_with_trivial_group_has_four_points_in_two_dims() {
        // oracle: 2π sin(2π xᵢ) = 0 exactly at xᵢ ∈ {0, 1/2}
        let f = Expression::parse("cos(2*pi*x1)+cos(2*pi*x2)", 2).unwrap();
        let model = QuotientModel::new(Arc::new(FiniteActionGroup::<f64>::trivial(2, true)), f).unwrap();
        let search = find_critical_points(&model).unwrap();
        assert_eq!(search.points.len(), 4);
    }

    #[test]
    fn bowl_has_one_critical_point() {
        let f = Expression::parse("x1^2+x2^2", 2).unwrap();
        let model = QuotientModel::new(Arc::new(FiniteActionGroup::<f64>::trivial(2, false)), f).unwrap();
        let search = find_critical_points(&model).unwrap();
        assert_eq!(search.points.len(), 1);
        assert!(search.points[0].norm() < 1e-9);
        assert_eq!(search.stats.converged, search.stats.seeds);
    }

    #[test]
    fn no_seeds_is_an_error() {
        let f = Expression::parse("x1^2", 1).unwrap();
        let model = QuotientModel::new(Arc::new(FiniteActionGroup::<f64>::trivial(1, false)), f)
            .unwrap()
            .with_seeds(SeedConfig { grid: 0, random: 0, rng_seed: 0, half_width: 1.0 });
        assert!(matches!(find_critical_points(&model), Err(CriticalError::NoSeeds)));
    }

    #[test]
    fn undefined_function_at_seed_is_reported() {
        let f = Expression::parse("1/x1", 1).unwrap();
        let model = QuotientModel::new_unverified(Arc::new(FiniteActionGroup::<f64>::trivial(1, false)), f)
            .unwrap()
            .with_seeds(SeedConfig { grid: 3, random: 0, rng_seed: 0, half_width: 1.0 });
        assert!(matches!(find_critical_points(&model), Err(CriticalError::NonFiniteFunctionValue { .. })));
    }

    #[test]
    fn stabilizers_on_the_kummer_torus() {
        let model = kummer_quotient::<f64>();
        assert_eq!(stabilizer_of(&model, &v(&[0.0; 4])).unwrap().order(), 2);
        assert_eq!(stabilizer_of(&model, &v(&[0.5, 0.0, 0.5, 0.5])).unwrap().order(), 2);
        // -x ≢ x mod Z⁴
        assert_eq!(stabilizer_of(&model, &v(&[0.3, 0.0, 0.0, 0.0])).unwrap().order(), 1);

        let f = Expression::parse("x1^2", 1).unwrap();
        let trivial = QuotientModel::new(Arc::new(FiniteActionGroup::<f64>::trivial(1, false)), f).unwrap();
        assert!(stabilizer_of(&trivial, &v(&[0.7])).unwrap().is_trivial());
    }

    #[test]
    fn orbit_dedup_merges_images() {
        let model = kummer_quotient::<f64>();
        let reps = orbit_dedup(&model, &[v(&[0.3, 0.0, 0.0, 0.0]), v(&[-0.3, 0.0, 0.0, 0.0])]);
        assert_eq!(reps.len(), 1);
        assert!((reps[0][0] - 0.3).abs() < 1e-12);

        let half: Vec<DVector<f64>> =
            (0..16).map(|m| DVector::from_fn(4, |i, _| if m >> i & 1 == 1 { 0.5 } else { 0.0 })).collect();
        assert_eq!(orbit_dedup(&model, &half).len(), 16);

        let f = Expression::parse("x1^2+x2^2", 2).unwrap();
        let trivial = QuotientModel::new(Arc::new(FiniteActionGroup::<f64>::trivial(2, false)), f).unwrap();
        let pts = vec![v(&[0.1, 0.2]), v(&[-0.1, -0.2])];
        assert_eq!(orbit_dedup(&trivial, &pts).len(), 2);

        let refl = AffineIsometry::linear_map(DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0])).unwrap();
        let g = Arc::new(generate_group(2, &[refl], false, 4).unwrap());
        let f = Expression::parse("x1^2+x2^2", 2).unwrap();
        let mirrored = QuotientModel::new(g, f).unwrap();
        let reps = orbit_dedup(&mirrored, &[v(&[0.1, 0.2]), v(&[-0.1, 0.2])]);
        assert_eq!(reps, vec![v(&[-0.1, 0.2])]);
    }
}
