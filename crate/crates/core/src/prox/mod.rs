//! The proximal point algorithm
//! `x_{i+1} = argmin_y f(y) + ‖y − x_i‖²/(2t_i)`, `t_i ∈ (0, 1]`,
//! together with executable checks of what its iterates must satisfy:
//! value descent, subgradient optimality, projection onto sublevel sets,
//! self-contractedness of the iterate polyline and the step-sum bound
//! `Σ‖x_i − x_{i+1}‖ ≤ 2C_n‖x_0 − x_∞‖`.

mod function;
mod simplex;
mod solver;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use function::{ConvexFunction, CustomFunction, MaxAffine, NormScaled, Huber, Quadratic};
pub use solver::{ProxMethod, ProxSolution};
pub(crate) use solver::prox_point;

use crate::curves::{is_self_contracted_vertices, DiscreteCurve, PredicateVerdict, ToleranceConfig, Witness};
use crate::error::{Error, Result};
use crate::geom::sphere::fill_unit_gaussian;
use crate::point::{dist, Point};
use crate::spherelemmas::bound_constants_for_dim;

/// Step sizes `t_i`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProxSchedule {
    Constant(f64),
    /// `t_i = initial · ratio^i`.
    Geometric { initial: f64, ratio: f64 },
    /// `t_i = 1/(i + 1)`.
    Harmonic,
    Explicit(Vec<f64>),
}

impl ProxSchedule {
    /// `t_i`, or `None` once an explicit list is exhausted.
    pub fn step(&self, i: usize) -> Option<f64> {
        match self {
            ProxSchedule::Constant(t) => Some(*t),
            ProxSchedule::Geometric { initial, ratio } => Some(initial * ratio.powi(i as i32)),
            ProxSchedule::Harmonic => Some(1.0 / (i + 1) as f64),
            ProxSchedule::Explicit(ts) => ts.get(i).copied(),
        }
    }

    /// Checks every `t_i`, `i < iterations`, lies in `(0, 1]`.
    pub fn validate(&self, iterations: usize) -> Result<()> {
        for i in 0..iterations {
            match self.step(i) {
                Some(t) if !(t > 0.0 && t <= 1.0) => return Err(Error::StepOutOfRange(t)),
                Some(_) => {}
                None => break,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIter,
    StepBelowTol,
    Fixpoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxConfig {
    pub max_iter: usize,
    /// Stop once `‖x_{i+1} − x_i‖ < stop_step`.
    pub stop_step: f64,
    /// Accuracy asked of the subproblem solver.
    pub solver_tol: f64,
}

impl Default for ProxConfig {
    fn default() -> Self {
        ProxConfig { max_iter: 100, stop_step: 0.0, solver_tol: 1e-12 }
    }
}

/// Iterates of one proximal run. `steps[i]` and `residuals[i]` belong to the
/// move from `points[i]` to `points[i + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxTrace {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    pub steps: Vec<f64>,
    pub residuals: Vec<f64>,
    pub terminated_by: Termination,
}

impl ProxTrace {
    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn last(&self) -> &Point {
        &self.points[self.points.len() - 1]
    }

    /// `Σ‖x_i − x_{i+1}‖`.
    pub fn step_length_sum(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }
}

/// One proximal step with `t ∈ (0, 1]`.
pub fn prox_step(f: &dyn ConvexFunction, x: &Point, t: f64, tol: f64) -> Result<ProxSolution> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::StepOutOfRange(t));
    }
    prox_point(f, x, t, tol)
}

/// Runs the proximal algorithm from `x0`.
///
/// A move no longer than the solver residual (plus a few ulps of `‖x‖`) is
/// indistinguishable from staying put; it ends the run as a fixpoint without
/// being recorded.
pub fn run_prox(
    f: &dyn ConvexFunction,
    x0: &Point,
    schedule: &ProxSchedule,
    config: &ProxConfig,
) -> Result<ProxTrace> {
    if config.max_iter == 0 {
        return Err(Error::invalid("max_iter must be >= 1"));
    }
    if x0.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: x0.dim() });
    }
    schedule.validate(config.max_iter)?;
    let mut trace = ProxTrace {
        points: vec![x0.clone()],
        values: vec![f.value(x0)],
        steps: Vec::new(),
        residuals: Vec::new(),
        terminated_by: Termination::MaxIter,
    };
    for i in 0..config.max_iter {
        let Some(t) = schedule.step(i) else { break };
        let x = trace.last().clone();
        let sol = prox_step(f, &x, t, config.solver_tol)?;
        let moved = x.distance(&sol.point);
        let scale = x.iter().map(|c| c.abs()).fold(1.0, f64::max);
        if moved <= sol.residual + 64.0 * f64::EPSILON * scale {
            trace.terminated_by = Termination::Fixpoint;
            break;
        }
        trace.values.push(f.value(&sol.point));
        trace.points.push(sol.point);
        trace.steps.push(t);
        trace.residuals.push(sol.residual);
        if moved < config.stop_step {
            trace.terminated_by = Termination::StepBelowTol;
            break;
        }
    }
    Ok(trace)
}

/// The iterate polyline `⋃[x_i, x_{i+1}]`, with params equal to the
/// iteration index.
pub fn trace_to_curve(trace: &ProxTrace) -> DiscreteCurve {
    let mut points: Vec<Point> = Vec::with_capacity(trace.points.len());
    let mut params = Vec::with_capacity(trace.points.len());
    for (i, p) in trace.points.iter().enumerate() {
        if points.last() != Some(p) {
            points.push(p.clone());
            params.push(i as f64);
        }
    }
    DiscreteCurve::with_params(points, params).expect("trace points share one dimension")
}

/// Quantitative descent `f(x_i) − f(x_{i+1}) ≥ ‖x_{i+1} − x_i‖²/(2t_i) − tol`.
/// Witness is `(i, i+1, i+1)`.
pub fn verify_descent(trace: &ProxTrace, tol: f64) -> PredicateVerdict {
    let mut margin = f64::INFINITY;
    let mut failure = None;
    for i in 0..trace.steps.len() {
        let step = trace.points[i].distance(&trace.points[i + 1]);
        let slack = trace.values[i] - trace.values[i + 1] - step * step / (2.0 * trace.steps[i]);
        margin = margin.min(slack);
        if slack < -tol && failure.is_none() {
            failure = Some(Witness { indices: [i, i + 1, i + 1], violation: -slack });
        }
    }
    PredicateVerdict::from_scan(failure, margin)
}

/// Optimality of each step: `dist((x_i − x_{i+1})/t_i, ∂f(x_{i+1})) ≤ tol`.
/// `None` when `f` cannot measure distances to its subdifferential.
pub fn verify_optimality(trace: &ProxTrace, f: &dyn ConvexFunction, tol: f64) -> Option<PredicateVerdict> {
    let mut margin = f64::INFINITY;
    let mut failure = None;
    for i in 0..trace.steps.len() {
        let (a, b) = (&trace.points[i], &trace.points[i + 1]);
        let v: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| (x - y) / trace.steps[i]).collect();
        let d = f.subdifferential_distance(b, &v)?;
        margin = margin.min(tol - d);
        if d > tol && failure.is_none() {
            failure = Some(Witness { indices: [i, i + 1, i + 1], violation: d });
        }
    }
    Some(PredicateVerdict::from_scan(failure, margin))
}

/// `‖x_{i₂} − x_{i₃}‖ ≤ ‖x_{i₁} − x_{i₃}‖` for all `i₁ < i₂ < i₃`.
pub fn verify_monotone_distances(trace: &ProxTrace, tol: f64) -> PredicateVerdict {
    let curve = DiscreteCurve::new(trace.points.clone()).expect("nonempty trace");
    is_self_contracted_vertices(&curve, &ToleranceConfig { abs_tol: tol, rel_margin: 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionReport {
    pub verdict: PredicateVerdict,
    /// Sublevel points actually tested.
    pub tested: usize,
    /// Steps for which fewer than the requested number of sublevel points
    /// could be found.
    pub sampling_shortfalls: usize,
}

/// Samples points `y` with `f(y) ≤ f(x_{i+1})` and checks that `x_{i+1}` is at
/// least as close to `x_i` as any of them: `‖x_{i+1} − x_i‖ ≤ ‖y − x_i‖ + tol`.
///
/// Candidates are drawn uniformly from a ball around `x_{i+1}` of radius
/// `2‖x_i − x_{i+1}‖` and kept when they fall in the sublevel set; the later
/// iterates are always tested too. Witness is `(i, i+1, sample)`.
pub fn verify_projection_property(
    trace: &ProxTrace,
    f: &dyn ConvexFunction,
    seed: u64,
    samples: usize,
    tol: f64,
) -> ProjectionReport {
    let n = trace.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dir = vec![0.0; n];
    let mut margin = f64::INFINITY;
    let mut failure = None;
    let (mut tested, mut shortfalls) = (0, 0);
    for i in 0..trace.points.len().saturating_sub(1) {
        let (xi, xn) = (&trace.points[i], &trace.points[i + 1]);
        let level = f.value(xn);
        let step = xi.distance(xn);
        let radius = (2.0 * step).max(1e-12);
        let mut check = |y: &[f64], k: usize, tested: &mut usize| {
            *tested += 1;
            let slack = dist(y, xi) + tol - step;
            margin = margin.min(slack);
            if slack < 0.0 && failure.is_none() {
                failure = Some(Witness { indices: [i, i + 1, k], violation: -slack });
            }
        };
        for (k, later) in trace.points.iter().enumerate().skip(i + 1) {
            check(later, k, &mut tested);
        }
        let mut accepted = 0;
        for k in 0..samples.saturating_mul(200) {
            if accepted == samples {
                break;
            }
            fill_unit_gaussian(&mut rng, &mut dir);
            let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
            let y: Vec<f64> = xn.iter().zip(&dir).map(|(c, d)| c + r * d).collect();
            if f.value(&y) <= level {
                accepted += 1;
                check(&y, trace.points.len() + k, &mut tested);
            }
        }
        if accepted < samples {
            shortfalls += 1;
        }
    }
    ProjectionReport { verdict: PredicateVerdict::from_scan(failure, margin), tested, sampling_shortfalls: shortfalls }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub total_step_sum: f64,
    /// `‖x_0 − x_last‖`, the last iterate standing in for `x_∞`.
    pub radius: f64,
    /// `2·C_n·radius`.
    pub bound: f64,
    /// `total_step_sum / radius` (`NaN` when the radius is 0).
    pub ratio: f64,
    pub holds: bool,
    /// `‖x_i − x_last‖ ≤ ‖x_0 − x_last‖ + tol` for every `i`.
    pub radius_holds: bool,
    /// `x_0 = x_last` while the trace moved.
    pub inconclusive: bool,
}

pub fn verify_convergence_bound(trace: &ProxTrace, tol: f64) -> Result<ConvergenceReport> {
    if trace.points.len() < 2 {
        return Err(Error::invalid("convergence check needs at least two iterates"));
    }
    let consts = bound_constants_for_dim(trace.dim())?;
    let last = trace.last();
    let total = trace.step_length_sum();
    let radius = trace.points[0].distance(last);
    let bound = 2.0 * consts.c_n * radius;
    let inconclusive = radius == 0.0 && total > 0.0;
    Ok(ConvergenceReport {
        total_step_sum: total,
        radius,
        bound,
        ratio: if radius > 0.0 { total / radius } else { f64::NAN },
        holds: !inconclusive && total <= bound + tol,
        radius_holds: trace.points.iter().all(|p| p.distance(last) <= radius + tol),
        inconclusive,
    })
}
