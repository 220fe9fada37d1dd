//! Gradient flows on a chart: adaptive Dormand–Prince integration, the
//! unit-speed reparametrization `∇f/‖∇f‖²`, equivariance checks and basin
//! counts against a certified set of critical points.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::critical::{assert_morse, CriticalError, MorseCertificate, QuotientModel};
use crate::expr::ExprError;
use crate::group::torus::{distance, wrap};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("|grad f|² = {grad_norm_sq:e} at t = {time}; unit-speed field undefined near a critical point")]
    NearCriticalSingularity { time: f64, grad_norm_sq: f64 },
    #[error("step size fell to {step:e} at t = {time}")]
    StepFailure { time: f64, step: f64 },
    #[error("start point has dimension {found}, chart has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no group element {0}")]
    NoSuchElement(usize),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Critical(#[from] CriticalError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Field {
    /// `-∇f`
    NegGradient,
    /// `+∇f`
    PosGradient,
    /// `∇f/‖∇f‖²`, along which `f` grows at unit rate.
    UnitSpeedGradient,
}

impl std::str::FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "neg" | "neg-gradient" => Ok(Field::NegGradient),
            "pos" | "pos-gradient" => Ok(Field::PosGradient),
            "unit" | "unit-speed" => Ok(Field::UnitSpeedGradient),
            _ => Err(format!("unknown field '{s}' (expected neg, pos or unit)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StepControl<T> {
    pub rtol: T,
    pub atol: T,
    pub initial_step: T,
    pub min_step: T,
    pub max_step: T,
    pub max_steps: usize,
    /// Stop when a certified critical point is reached.
    pub detect_convergence: bool,
    /// Force a recorded state at every multiple of this time.
    pub output_every: Option<T>,
    /// `‖∇f‖²` below which the unit-speed field is refused.
    pub unit_speed_guard: T,
}

impl<T: Scalar> Default for StepControl<T> {
    fn default() -> Self {
        Self {
            rtol: T::of(1e-10),
            atol: T::of(1e-12),
            initial_step: T::of(1e-3),
            min_step: T::of(1e-12),
            max_step: T::of(0.05),
            max_steps: 200_000,
            detect_convergence: true,
            output_every: None,
            unit_speed_guard: T::of(1e-4),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TerminalStatus {
    /// Reached the certified critical point with this index.
    Converged(usize),
    MaxTimeReached,
    LeftDomain,
}

#[derive(Clone, Debug)]
pub struct Trajectory<T: Scalar> {
    pub times: Vec<T>,
    /// States reduced modulo the lattice on torus charts.
    pub states: Vec<DVector<T>>,
    pub f_values: Vec<T>,
    pub terminal_status: TerminalStatus,
}

impl<T: Scalar> Trajectory<T> {
    pub fn last_state(&self) -> &DVector<T> {
        self.states.last().expect("trajectory has a start point")
    }

    /// State at a recorded time, if present.
    pub fn state_at(&self, t: T, tol: T) -> Option<&DVector<T>> {
        self.times.iter().position(|s| (*s - t).abs() <= tol).map(|i| &self.states[i])
    }
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

fn vector_field<T: Scalar>(
    model: &QuotientModel<T>,
    field: Field,
    guard: T,
    t: T,
    x: &DVector<T>,
) -> Result<DVector<T>, FlowError> {
    let g = model.function().gradient(x)?;
    Ok(match field {
        Field::NegGradient => -g,
        Field::PosGradient => g,
        Field::UnitSpeedGradient => {
            let n2 = g.norm_squared();
            if n2 < guard {
                return Err(FlowError::NearCriticalSingularity { time: t.as_f64(), grad_norm_sq: n2.as_f64() });
            }
            g / n2
        }
    })
}

/// A chart with a list of known critical points (all orbit images, upstairs)
/// to which trajectories may converge.
pub struct FlowLab<'a, T: Scalar> {
    model: &'a QuotientModel<T>,
    targets: Vec<(DVector<T>, usize)>,
    representatives: Vec<DVector<T>>,
    control: StepControl<T>,
}

impl<'a, T: Scalar> FlowLab<'a, T> {
    /// Uses the given orbit representatives as the convergence targets.
    pub fn new(model: &'a QuotientModel<T>, representatives: Vec<DVector<T>>) -> Self {
        let mut targets = Vec::new();
        for (k, r) in representatives.iter().enumerate() {
            for g in model.group().elements() {
                let y = wrap(&g.apply(r), model.lattice(), model.tolerances().orbit);
                if targets.iter().all(|(t, _)| distance(t, &y, model.lattice()) >= model.tolerances().orbit) {
                    targets.push((y, k));
                }
            }
        }
        Self { model, targets, representatives, control: StepControl::default() }
    }

    /// Runs the Morse certification and targets the certified points.
    pub fn certify(model: &'a QuotientModel<T>) -> Result<(Self, MorseCertificate<T>), FlowError> {
        let cert = assert_morse(model)?;
        let reps = cert.points.iter().map(|c| c.location().expect("chart points carry locations").clone()).collect();
        Ok((Self::new(model, reps), cert))
    }

    pub fn with_control(mut self, control: StepControl<T>) -> Self {
        self.control = control;
        self
    }

    pub fn control(&self) -> &StepControl<T> {
        &self.control
    }

    pub fn model(&self) -> &QuotientModel<T> {
        self.model
    }

    pub fn representatives(&self) -> &[DVector<T>] {
        &self.representatives
    }

    fn converged_to(&self, x: &DVector<T>) -> Result<Option<usize>, FlowError> {
        let tol = self.model.tolerances();
        if self.model.function().gradient(x)?.norm() >= tol.newton {
            return Ok(None);
        }
        let radius = tol.orbit * T::of(10.0);
        Ok(self.targets.iter().find(|(t, _)| distance(t, x, self.model.lattice()) < radius).map(|(_, k)| *k))
    }

    /// Integrates `field` from `x0` up to time `t_max`.
    pub fn integrate(&self, x0: &DVector<T>, field: Field, t_max: T) -> Result<Trajectory<T>, FlowError> {
        let model = self.model;
        let n = model.dim();
        if x0.len() != n {
            return Err(FlowError::DimensionMismatch { expected: n, found: x0.len() });
        }
        let ctl = &self.control;
        let f = model.function();
        let lattice = model.lattice();
        let snap = T::zero();
        let store = |x: &DVector<T>| wrap(x, lattice, snap);

        let mut t = T::zero();
        let mut x = x0.clone();
        let mut traj = Trajectory {
            times: vec![t],
            states: vec![store(&x)],
            f_values: vec![f.eval(&x)?],
            terminal_status: TerminalStatus::MaxTimeReached,
        };
        if ctl.detect_convergence {
            if let Some(k) = self.converged_to(&x)? {
                traj.terminal_status = TerminalStatus::Converged(k);
                return Ok(traj);
            }
        }

        let mut h = ctl.initial_step.min(ctl.max_step);
        let mut k1 = vector_field(model, field, ctl.unit_speed_guard, t, &x)?;
        let mut steps = 0usize;
        let eps = T::of(1e-12) * (T::one() + t_max.abs());
        while t < t_max - eps {
            if steps >= ctl.max_steps {
                return Err(FlowError::StepFailure { time: t.as_f64(), step: h.as_f64() });
            }
            steps += 1;
            let mut step = h.min(t_max - t);
            if let Some(every) = ctl.output_every {
                let next_mark = ((t + eps) / every).floor() * every + every;
                if next_mark > t + eps {
                    step = step.min(next_mark - t);
                }
            }

            let mut k = vec![k1.clone()];
            for stage in 1..7 {
                let mut y = x.clone();
                for (j, kj) in k.iter().enumerate() {
                    let a = A[stage][j];
                    if a != 0.0 {
                        y.axpy(step * T::of(a), kj, T::one());
                    }
                }
                k.push(vector_field(model, field, ctl.unit_speed_guard, t + step * T::of(C[stage]), &y)?);
            }
            let mut x5 = x.clone();
            let mut err = DVector::<T>::zeros(n);
            for s in 0..7 {
                if B5[s] != 0.0 {
                    x5.axpy(step * T::of(B5[s]), &k[s], T::one());
                }
                err.axpy(step * T::of(B5[s] - B4[s]), &k[s], T::one());
            }
            let mut sum = T::zero();
            for i in 0..n {
                let scale = ctl.atol + ctl.rtol * x[i].abs().max(x5[i].abs());
                let e = err[i] / scale;
                sum += e * e;
            }
            let e = (sum / T::of(n.max(1) as f64)).sqrt();
            if !e.is_finite() {
                h = step * T::of(0.2);
                if h < ctl.min_step {
                    return Err(FlowError::StepFailure { time: t.as_f64(), step: h.as_f64() });
                }
                continue;
            }
            let factor = if e == T::zero() {
                T::of(5.0)
            } else {
                (T::of(0.9) * e.powf(T::of(-0.2))).clamp(T::of(0.2), T::of(5.0))
            };
            if e <= T::one() {
                t += step;
                x = x5;
                k1 = k.pop().expect("seven stages");
                traj.times.push(t);
                traj.states.push(store(&x));
                traj.f_values.push(f.eval(&x)?);
                if !lattice && x.norm() > model.domain_radius() {
                    traj.terminal_status = TerminalStatus::LeftDomain;
                    return Ok(traj);
                }
                if ctl.detect_convergence {
                    if let Some(idx) = self.converged_to(&x)? {
                        traj.terminal_status = TerminalStatus::Converged(idx);
                        return Ok(traj);
                    }
                }
                h = (step * factor).min(ctl.max_step);
                // a step shortened to hit t_max or an output mark should not shrink the next one
                h = h.max(step.min(ctl.max_step));
            } else {
                h = step * factor;
                if h < ctl.min_step {
                    return Err(FlowError::StepFailure { time: t.as_f64(), step: h.as_f64() });
                }
            }
        }
        Ok(traj)
    }

    /// `max_t dist(φ_t(g·x0), g·φ_t(x0))` over the times of a fixed output grid.
    pub fn verify_equivariance(&self, x0: &DVector<T>, g: usize, field: Field, t_max: T) -> Result<T, FlowError> {
        let group = self.model.group();
        if g >= group.order() {
            return Err(FlowError::NoSuchElement(g));
        }
        let every = t_max / T::of(100.0);
        let lab = FlowLab {
            model: self.model,
            targets: Vec::new(),
            representatives: Vec::new(),
            control: StepControl { detect_convergence: false, output_every: Some(every), ..self.control.clone() },
        };
        let elem = group.element(g);
        let a = lab.integrate(x0, field, t_max)?;
        let b = lab.integrate(&elem.apply(x0), field, t_max)?;
        let mut worst = T::zero();
        for k in 0..=100 {
            let t = every * T::of(k as f64);
            let tol = every * T::of(1e-6);
            let (Some(xa), Some(xb)) = (a.state_at(t, tol), b.state_at(t, tol)) else {
                continue;
            };
            let d = distance(&elem.apply(xa), xb, self.model.lattice());
            if d > worst {
                worst = d;
            }
        }
        Ok(worst)
    }

    /// Negative-gradient flow from every seed, tallied by terminal critical point.
    pub fn basin_census(&self, seeds: &[DVector<T>], t_max: T) -> BasinCensus {
        let results: Vec<Result<TerminalStatus, FlowError>> = seeds
            .par_iter()
            .map(|s| self.integrate(s, Field::NegGradient, t_max).map(|tr| tr.terminal_status))
            .collect();
        let mut census = BasinCensus { hits: vec![0; self.representatives.len()], ..Default::default() };
        for r in results {
            match r {
                Ok(TerminalStatus::Converged(k)) => census.hits[k] += 1,
                Ok(TerminalStatus::MaxTimeReached) => census.max_time += 1,
                Ok(TerminalStatus::LeftDomain) => census.left_domain += 1,
                Err(_) => census.failed += 1,
            }
        }
        census
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BasinCensus {
    /// Hits per orbit representative.
    pub hits: Vec<usize>,
    pub max_time: usize,
    pub left_domain: usize,
    pub failed: usize,
}

impl BasinCensus {
    pub fn converged(&self) -> usize {
        self.hits.iter().sum()
    }

    pub fn total(&self) -> usize {
        self.converged() + self.max_time + self.left_domain + self.failed
    }
}

/// `max |Δf/Δt - 1|` between consecutive recorded states.
pub fn verify_unit_speed<T: Scalar>(traj: &Trajectory<T>) -> T {
    let mut worst = T::zero();
    for k in 1..traj.times.len() {
        let dt = traj.times[k] - traj.times[k - 1];
        if dt <= T::zero() {
            continue;
        }
        let dev = ((traj.f_values[k] - traj.f_values[k - 1]) / dt - T::one()).abs();
        if dev > worst {
            worst = dev;
        }
    }
    worst
}

/// Uniform seeds in `[0,1)ⁿ` on a torus, or in the seed box otherwise.
pub fn random_seeds<T: Scalar>(model: &QuotientModel<T>, count: usize, rng_seed: u64) -> Vec<DVector<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let w = model.seeds().half_width;
    (0..count)
        .map(|_| {
            DVector::from_fn(model.dim(), |_, _| {
                let u: f64 = rng.random();
                T::of(if model.lattice() { u } else { (2.0 * u - 1.0) * w })
            })
        })
        .collect()
}
