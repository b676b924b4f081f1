//! Solvers for the proximal subproblem `min_y f(y) + ‖y − x‖²/(2t)`.
//!
//! Every route returns a residual that bounds the distance from the returned
//! point to the exact minimizer (zero for closed forms).

use super::function::ConvexFunction;
use crate::error::{Error, Result};
use crate::point::{dist, norm, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxMethod {
    Exact,
    Structured,
    Bisection,
    GradientDescent,
    NelderMead,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxSolution {
    pub point: Point,
    pub residual: f64,
    pub method: ProxMethod,
}

const BISECTION_MAX_ITER: usize = 2000;
const DESCENT_MAX_ITER: usize = 2_000_000;
const NELDER_MEAD_MAX_ITER: usize = 200_000;

/// Proximal point for any `t > 0`. The public [`super::prox_step`] adds the
/// `t ∈ (0, 1]` restriction of the algorithm.
pub(crate) fn prox_point(f: &dyn ConvexFunction, x: &[f64], t: f64, tol: f64) -> Result<ProxSolution> {
    let n = f.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("prox parameter {t} must be positive")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("solver tolerance must be positive"));
    }
    let (point, residual, method) = if let Some(y) = f.exact_prox(x, t) {
        (y, 0.0, ProxMethod::Exact)
    } else if let Some(res) = f.structured_prox(x, t, tol) {
        let (y, r) = res?;
        (y, r, ProxMethod::Structured)
    } else if n == 1 {
        let (y, r) = bisection(f, x[0], t, tol)?;
        (vec![y], r, ProxMethod::Bisection)
    } else if let (Some(lip), Some(_)) = (f.gradient_lipschitz(), f.gradient(x)) {
        let (y, r) = gradient_descent(f, x, t, lip, tol)?;
        (y, r, ProxMethod::GradientDescent)
    } else if n <= 3 {
        let (y, r) = nelder_mead(f, x, t, tol)?;
        (y, r, ProxMethod::NelderMead)
    } else {
        return Err(Error::NoSolver("nonsmooth function in dimension > 3 without a prox oracle"));
    };
    if point.iter().any(|c| !c.is_finite()) {
        return Err(Error::SolverFailure { iterations: 0, residual: f64::INFINITY });
    }
    Ok(ProxSolution { point: Point::from_vec_unchecked(point), residual, method })
}

/// Root of the nondecreasing map `s ↦ s − x + t·g(s)`; the bracket width is
/// the residual.
fn bisection(f: &dyn ConvexFunction, x: f64, t: f64, tol: f64) -> Result<(f64, f64)> {
    let phi = |s: f64| s - x + t * f.subgradient(&[s])[0];
    let g0 = f.subgradient(&[x])[0];
    if g0 == 0.0 {
        return Ok((x, 0.0));
    }
    let other = x - t * g0;
    let (mut lo, mut hi) = if g0 > 0.0 { (other, x) } else { (x, other) };
    for _ in 0..BISECTION_MAX_ITER {
        let width = hi - lo;
        let mid = 0.5 * (lo + hi);
        if width <= tol || mid <= lo || mid >= hi {
            return Ok((mid, width.min(tol)));
        }
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::SolverFailure { iterations: BISECTION_MAX_ITER, residual: hi - lo })
}

/// Gradient descent with step `1/(L + 1/t)`; by `1/t`-strong convexity
/// `‖y − y*‖ ≤ t·‖∇φ(y)‖`.
fn gradient_descent(f: &dyn ConvexFunction, x: &[f64], t: f64, lip: f64, tol: f64) -> Result<(Vec<f64>, f64)> {
    let step = 1.0 / (lip + 1.0 / t);
    let mut y = x.to_vec();
    let mut residual = f64::INFINITY;
    for _ in 0..DESCENT_MAX_ITER {
        let g: Vec<f64> = f
            .gradient(&y)
            .expect("gradient declared")
            .iter()
            .zip(y.iter().zip(x))
            .map(|(gi, (yi, xi))| gi + (yi - xi) / t)
            .collect();
        residual = t * norm(&g);
        if residual <= tol {
            return Ok((y, residual));
        }
        y.iter_mut().zip(&g).for_each(|(yi, gi)| *yi -= step * gi);
    }
    Err(Error::SolverFailure { iterations: DESCENT_MAX_ITER, residual })
}

/// Derivative-free fallback for small nonsmooth problems. The residual is the
/// final simplex diameter.
fn nelder_mead(f: &dyn ConvexFunction, x: &[f64], t: f64, tol: f64) -> Result<(Vec<f64>, f64)> {
    let n = x.len();
    let phi = |y: &[f64]| f.value(y) + dist(y, x).powi(2) / (2.0 * t);
    let scale = (t * norm(&f.subgradient(x))).max(1e-3);
    let mut start = x.to_vec();
    let mut diameter = f64::INFINITY;
    // restarts shake off premature collapse
    for _ in 0..3 {
        let mut simplex: Vec<Vec<f64>> = vec![start.clone()];
        for i in 0..n {
            let mut v = start.clone();
            v[i] += scale;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| phi(v)).collect();
        for _ in 0..NELDER_MEAD_MAX_ITER {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();
            diameter = simplex[1..].iter().map(|v| dist(v, &simplex[0])).fold(0.0, f64::max);
            if diameter <= 0.1 * tol {
                break;
            }
            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
                .collect();
            let along = |s: f64| -> Vec<f64> {
                centroid.iter().zip(&simplex[n]).map(|(c, w)| c + s * (c - w)).collect()
            };
            let reflected = along(1.0);
            let fr = phi(&reflected);
            if fr < values[0] {
                let expanded = along(2.0);
                let fe = phi(&expanded);
                if fe < fr {
                    simplex[n] = expanded;
                    values[n] = fe;
                } else {
                    simplex[n] = reflected;
                    values[n] = fr;
                }
            } else if fr < values[n - 1] {
                simplex[n] = reflected;
                values[n] = fr;
            } else {
                let contracted = if fr < values[n] { along(0.5) } else { along(-0.5) };
                let fc = phi(&contracted);
                if fc < values[n].min(fr) {
                    simplex[n] = contracted;
                    values[n] = fc;
                } else {
                    let best = simplex[0].clone();
                    for v in simplex.iter_mut().skip(1) {
                        v.iter_mut().zip(&best).for_each(|(vi, bi)| *vi = bi + 0.5 * (*vi - bi));
                    }
                    for (i, v) in simplex.iter().enumerate().skip(1) {
                        values[i] = phi(v);
                    }
                }
            }
        }
        let restart_moved = dist(&simplex[0], &start);
        start = simplex[0].clone();
        if diameter <= 0.1 * tol && restart_moved <= tol {
            return Ok((start, diameter.max(restart_moved)));
        }
    }
    if diameter <= 0.1 * tol {
        Ok((start, diameter))
    } else {
        Err(Error::SolverFailure { iterations: NELDER_MEAD_MAX_ITER, residual: diameter })
    }
}
