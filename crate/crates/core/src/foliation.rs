//! Orbits of the foliation by sublevel sets `[f ≤ r]` of a convex function,
//! fine-step gradient-flow curves, and the greedy self-contracted polygonal
//! approximation of strongly self-contracted curves.

use crate::curves::{secant_cone_check, DiscreteCurve, PredicateVerdict, ToleranceConfig, Witness};
use crate::error::{Error, Result};
use crate::point::{dist, dot_diff, lerp, Point};
use crate::prox::{prox_point, ConvexFunction, ProxTrace};

/// A polyline whose `k`-th vertex sits on the level set `f = levels[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoliationOrbit {
    pub curve: DiscreteCurve,
    pub levels: Vec<f64>,
}

impl FoliationOrbit {
    /// Reads a proximal trace as an orbit with levels `f(x_i)`.
    pub fn from_trace(trace: &ProxTrace) -> Self {
        let params = (0..trace.points.len()).map(|i| i as f64).collect();
        FoliationOrbit {
            curve: DiscreteCurve::with_params(trace.points.clone(), params).expect("trace points share one dimension"),
            levels: trace.values.clone(),
        }
    }
}

const LEVEL_MAX_ITER: usize = 400;
const LAMBDA_MAX: f64 = 1e15;

/// Nearest point of `[f ≤ level]` to `x`, found as `prox_{λf}(x)` for the `λ`
/// with `f(prox_{λf}(x)) = level ± tol`. The map `λ ↦ f(prox_{λf}(x))` is
/// nonincreasing, which makes a monotone bracket.
fn project_to_sublevel(f: &dyn ConvexFunction, x: &[f64], level: f64, tol: f64) -> Result<Point> {
    let solver_tol = (tol * 1e-3).clamp(1e-13, 1e-7);
    let at = |lambda: f64| -> Result<(Point, f64)> {
        let sol = prox_point(f, x, lambda, solver_tol)?;
        let v = f.value(&sol.point);
        Ok((sol.point, v))
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut y, mut v) = at(hi)?;
    let mut iterations = 0;
    while v > level + tol {
        iterations += 1;
        lo = hi;
        hi *= 4.0;
        if hi > LAMBDA_MAX {
            return Err(Error::SolverFailure { iterations, residual: v - level });
        }
        (y, v) = at(hi)?;
    }
    while (v - level).abs() > tol {
        iterations += 1;
        if iterations > LEVEL_MAX_ITER || hi - lo <= f64::EPSILON * hi {
            return Err(Error::SolverFailure { iterations, residual: (v - level).abs() });
        }
        let mid = if lo > 0.0 && hi > 4.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        (y, v) = at(mid)?;
        if v > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(y)
}

/// Successive nearest-point projections of `x0` onto `[f ≤ r_k]` for a
/// strictly decreasing list of levels.
///
/// A level within `tol` of the current value leaves the point where it is
/// and is not recorded. Recorded levels start with `f(x0)`.
pub fn sublevel_projection_orbit(
    f: &dyn ConvexFunction,
    x0: &Point,
    levels: &[f64],
    tol: f64,
) -> Result<FoliationOrbit> {
    if x0.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: x0.dim() });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("level tolerance must be positive"));
    }
    if levels.iter().any(|r| !r.is_finite()) {
        return Err(Error::invalid("levels must be finite"));
    }
    if let Some(w) = levels.windows(2).find(|w| w[1] >= w[0]) {
        return Err(Error::invalid(format!("levels must strictly decrease, got {} then {}", w[0], w[1])));
    }
    let start = f.value(x0);
    if let Some(&first) = levels.first() {
        if first > start + tol {
            return Err(Error::invalid(format!("first level {first} exceeds f(x0) = {start}")));
        }
    }
    if let (Some(inf), Some(&lowest)) = (f.infimum(), levels.last()) {
        if lowest < inf {
            return Err(Error::LevelBelowInfimum { level: lowest, infimum: inf });
        }
    }

    let mut points = vec![x0.clone()];
    let mut recorded = vec![start];
    for &r in levels {
        let current = points.last().expect("orbit starts with x0");
        if r >= f.value(current) - tol {
            continue;
        }
        let next = project_to_sublevel(f, current, r, tol)?;
        points.push(next);
        recorded.push(r);
    }
    let params = (0..points.len()).map(|k| k as f64).collect();
    Ok(FoliationOrbit { curve: DiscreteCurve::with_params(points, params)?, levels: recorded })
}

/// Checks that recorded levels strictly decrease and that `f(p_k)` matches
/// `levels[k]` within `tol`. Witness is `(k, k+1, k+1)` for a level that fails
/// to decrease and `(k, k, k)` for a vertex off its level.
pub fn decreasing_level_check(orbit: &FoliationOrbit, f: &dyn ConvexFunction, tol: f64) -> PredicateVerdict {
    let mut margin = f64::INFINITY;
    let mut failure = None;
    let values: Vec<f64> = orbit.curve.points().iter().map(|p| f.value(p)).collect();
    for (k, (&v, &r)) in values.iter().zip(&orbit.levels).enumerate() {
        let off = (v - r).abs();
        margin = margin.min(tol - off);
        if off > tol && failure.is_none() {
            failure = Some(Witness { indices: [k, k, k], violation: off });
        }
    }
    if values.len() != orbit.levels.len() && failure.is_none() {
        let k = values.len().min(orbit.levels.len());
        failure = Some(Witness { indices: [k, k, k], violation: f64::INFINITY });
    }
    for k in 0..values.len().saturating_sub(1) {
        let drop = values[k] - values[k + 1];
        margin = margin.min(drop);
        let recorded_drop = match (orbit.levels.get(k), orbit.levels.get(k + 1)) {
            (Some(a), Some(b)) => a - b,
            _ => drop,
        };
        if (drop <= 0.0 || recorded_drop <= 0.0) && failure.is_none() {
            failure = Some(Witness { indices: [k, k + 1, k + 1], violation: -drop.min(recorded_drop) });
        }
    }
    PredicateVerdict::from_scan(failure, margin)
}

const FLOW_MAX_STEPS: f64 = 1e8;

/// Integrates `γ′ = −∇f(γ)` from `x0` over `[0, horizon]` with the classical
/// Runge–Kutta scheme and step `h`; the last step is shortened to land on
/// `horizon`. Params are the times.
pub fn gradient_flow_curve(f: &dyn ConvexFunction, x0: &Point, h: f64, horizon: f64) -> Result<DiscreteCurve> {
    if x0.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: x0.dim() });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("step {h} must be positive")));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::invalid(format!("horizon {horizon} must be >= 0")));
    }
    if f.gradient(x0).is_none() {
        return Err(Error::NoSolver("gradient flow needs a gradient oracle"));
    }
    let steps = (horizon / h * (1.0 - 1e-12)).ceil();
    if steps > FLOW_MAX_STEPS {
        return Err(Error::invalid("too many integration steps"));
    }
    let steps = steps as usize;
    let grad = |x: &[f64]| -> Result<Vec<f64>> {
        let g = f.gradient(x).ok_or(Error::NoSolver("gradient flow needs a gradient oracle"))?;
        if g.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("gradient is not finite"));
        }
        Ok(g)
    };
    let axpy = |x: &[f64], s: f64, d: &[f64]| -> Vec<f64> { x.iter().zip(d).map(|(a, b)| a - s * b).collect() };

    let mut points = vec![x0.clone()];
    let mut times = vec![0.0];
    let mut x = x0.coords().to_vec();
    for i in 0..steps {
        let t = i as f64 * h;
        let t_next = if i + 1 == steps { horizon } else { (i + 1) as f64 * h };
        let dt = t_next - t;
        let k1 = grad(&x)?;
        let k2 = grad(&axpy(&x, dt / 2.0, &k1))?;
        let k3 = grad(&axpy(&x, dt / 2.0, &k2))?;
        let k4 = grad(&axpy(&x, dt, &k3))?;
        for (j, c) in x.iter_mut().enumerate() {
            *c -= dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        points.push(Point::new(x.clone())?);
        times.push(t_next);
    }
    DiscreteCurve::with_params(points, times)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationResult {
    pub polyline: DiscreteCurve,
    /// Requested accuracy `δ`.
    pub accuracy: f64,
    /// Hausdorff distance between the polyline and the input polyline.
    pub hausdorff_achieved: f64,
    /// Index in the input curve of each polyline vertex, increasing.
    pub vertex_source_indices: Vec<usize>,
}

/// Self-contracted polygonal approximation of a strongly self-contracted
/// sampled curve.
///
/// Works backward from the last sample. From the current vertex `z` it takes
/// the earliest sample within arc length `δ` behind `z` whose secant
/// `p − z` makes an angle with `q − z` whose cosine is at most `−rel_margin`
/// for every later retained vertex `q`. The adjacent sample is always a
/// candidate, so sampling coarser than `δ` shows up in the achieved distance
/// rather than as a failure.
pub fn polygonal_approximation(
    curve: &DiscreteCurve,
    delta: f64,
    tol: &ToleranceConfig,
) -> Result<ApproximationResult> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("accuracy {delta} must be positive")));
    }
    let strong = secant_cone_check(curve, tol);
    if let Some(witness) = strong.witness {
        return Err(Error::NotStronglySelfContracted { witness });
    }
    let pts = curve.points();
    let mut arc = Vec::with_capacity(pts.len());
    arc.push(0.0);
    for w in pts.windows(2) {
        arc.push(arc.last().unwrap() + w[0].distance(&w[1]));
    }

    let mut retained = vec![pts.len() - 1];
    while let Some(&current) = retained.last() {
        if current == 0 {
            break;
        }
        let z = pts[current].coords();
        let mut first = current - 1;
        while first > 0 && arc[current] - arc[first - 1] <= delta {
            first -= 1;
        }
        let admissible = |j: usize| {
            let p = pts[j].coords();
            if p == z {
                return true;
            }
            let back = dist(p, z);
            retained[..retained.len() - 1].iter().all(|&q| {
                let q = pts[q].coords();
                let d = dist(q, z);
                d == 0.0 || dot_diff(p, z, q, z) <= -tol.rel_margin * back * d
            })
        };
        match (first..current).find(|&j| admissible(j)) {
            Some(j) => retained.push(j),
            None => return Err(Error::NoAdmissibleVertex { index: current }),
        }
    }
    retained.reverse();

    let mut vertices: Vec<Point> = Vec::with_capacity(retained.len());
    let mut sources = Vec::with_capacity(retained.len());
    for &j in &retained {
        if vertices.last() != Some(&pts[j]) {
            vertices.push(pts[j].clone());
            sources.push(j);
        }
    }
    let hausdorff_achieved = polyline_hausdorff(&vertices, pts, delta / 64.0);
    let params = match curve.params() {
        Some(ps) => sources.iter().map(|&j| ps[j]).collect(),
        None => sources.iter().map(|&j| j as f64).collect(),
    };
    Ok(ApproximationResult {
        polyline: DiscreteCurve::with_params(vertices, params)?,
        accuracy: delta,
        hausdorff_achieved,
        vertex_source_indices: sources,
    })
}

fn segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab_sq = dot_diff(b, a, b, a);
    if ab_sq == 0.0 {
        return dist(p, a);
    }
    let s = (dot_diff(p, a, b, a) / ab_sq).clamp(0.0, 1.0);
    dist(p, &lerp(a, b, s))
}

/// Hausdorff distance between two polylines. Each side is read at its
/// vertices and at spacing `step` along its segments, and measured exactly
/// against the other polyline.
fn polyline_hausdorff(a: &[Point], b: &[Point], step: f64) -> f64 {
    let one_sided = |from: &[Point], to: &[Point]| -> f64 {
        let to_polyline = |p: &[f64]| -> f64 {
            if to.len() == 1 {
                return dist(p, &to[0]);
            }
            to.windows(2).map(|w| segment_distance(p, &w[0], &w[1])).fold(f64::INFINITY, f64::min)
        };
        let mut worst = to_polyline(&from[0]);
        for w in from.windows(2) {
            let pieces = (w[0].distance(&w[1]) / step).ceil().max(1.0) as usize;
            for k in 1..=pieces {
                worst = worst.max(to_polyline(&lerp(&w[0], &w[1], k as f64 / pieces as f64)));
            }
        }
        worst
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// Smallest `⟨z_{k+1} − z_k, q − z_k⟩ / (‖·‖‖·‖)` slack of the retained
/// vertices, i.e. how far inside the normal cone every backward secant sits.
pub fn normal_cone_margin(polyline: &DiscreteCurve) -> f64 {
    let pts = polyline.points();
    let mut margin = f64::INFINITY;
    for k in 1..pts.len() {
        let (z, back) = (&pts[k], &pts[k - 1]);
        let nb = dist(back, z);
        for q in &pts[k + 1..] {
            let nq = dist(q, z);
            if nb > 0.0 && nq > 0.0 {
                margin = margin.min(-dot_diff(back, z, q, z) / (nb * nq));
            }
        }
    }
    margin
}
