//! Small convex quadratic programs over the probability simplex, solved by
//! accelerated projected gradient with adaptive restart.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::point::dot;

/// Euclidean projection onto `{λ ≥ 0, Σλ = 1}`.
fn project_simplex(v: &mut [f64]) {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cum += uj;
        let candidate = (cum - 1.0) / (j + 1) as f64;
        if uj - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
}

fn mat_vec(q: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    q.iter().map(|row| dot(row, x)).collect()
}

/// Minimizes `½ λᵀQλ + pᵀλ` over the simplex (`Q` symmetric PSD). Returns the
/// last iterate once `done` accepts it or the budget runs out.
pub(crate) fn simplex_qp(
    q: &[Vec<f64>],
    p: &[f64],
    max_iter: usize,
    done: impl Fn(&[f64]) -> bool,
) -> Result<Vec<f64>> {
    let m = p.len();
    if m == 0 {
        return Err(Error::Empty("simplex program"));
    }
    let lip = q.iter().enumerate().map(|(i, r)| r[i].abs()).sum::<f64>().max(1e-300);
    let objective = |x: &[f64]| 0.5 * dot(x, &mat_vec(q, x)) + dot(p, x);
    let mut x = vec![1.0 / m as f64; m];
    let mut y = x.clone();
    let mut momentum = 1.0f64;
    let mut f_prev = objective(&x);
    let mut restarted = false;
    for it in 0..max_iter {
        if it % 8 == 0 && done(&x) {
            return Ok(x);
        }
        if it % 64 == 0 {
            if let Some(z) = polished(q, p, &x, &done) {
                return Ok(z);
            }
        }
        let grad: Vec<f64> = mat_vec(q, &y).iter().zip(p).map(|(g, pi)| g + pi).collect();
        let mut next: Vec<f64> = y.iter().zip(&grad).map(|(yi, gi)| yi - gi / lip).collect();
        project_simplex(&mut next);
        let f_next = objective(&next);
        if f_next > f_prev {
            if restarted {
                // even a plain gradient step from x no longer descends
                break;
            }
            momentum = 1.0;
            y = x.clone();
            restarted = true;
            continue;
        }
        restarted = false;
        let m_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / m_next;
        y = next.iter().zip(&x).map(|(n, o)| n + beta * (n - o)).collect();
        let stalled = next == x;
        x = next;
        momentum = m_next;
        f_prev = f_next;
        if stalled {
            break;
        }
    }
    Ok(polished(q, p, &x, &done).unwrap_or(x))
}

fn polished(q: &[Vec<f64>], p: &[f64], x: &[f64], done: &impl Fn(&[f64]) -> bool) -> Option<Vec<f64>> {
    candidate_supports(q, p, x).into_iter().find_map(|s| polish(q, p, &s).filter(|z| done(z)))
}

/// Guesses for the optimal support: the coordinates of `x` above a few
/// thresholds, and the coordinates where the gradient is nearly minimal.
fn candidate_supports(q: &[Vec<f64>], p: &[f64], x: &[f64]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for thr in [1e-12, 1e-9, 1e-6, 1e-3] {
        let s: Vec<usize> = (0..x.len()).filter(|&i| x[i] > thr).collect();
        if !s.is_empty() && !out.contains(&s) {
            out.push(s);
        }
    }
    let grad: Vec<f64> = mat_vec(q, x).iter().zip(p).map(|(g, pi)| g + pi).collect();
    let gmin = grad.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = grad.iter().map(|g| g.abs()).fold(1.0, f64::max);
    for eta in [1e-9, 1e-6] {
        let s: Vec<usize> = (0..x.len()).filter(|&i| grad[i] <= gmin + eta * scale).collect();
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// Solves the KKT system of the equality-constrained problem on `support`.
/// Returns `None` when the result leaves the simplex.
fn polish(q: &[Vec<f64>], p: &[f64], support: &[usize]) -> Option<Vec<f64>> {
    let m_len = p.len();
    let k = support.len();
    let mut m = DMatrix::zeros(k + 1, k + 1);
    let mut rhs = DVector::zeros(k + 1);
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            m[(a, b)] = q[i][j];
        }
        m[(a, k)] = 1.0;
        m[(k, a)] = 1.0;
        rhs[a] = -p[i];
    }
    rhs[k] = 1.0;
    let solve = |b: &DVector<f64>| -> Option<DVector<f64>> {
        match m.clone().full_piv_lu().solve(b) {
            Some(v) => Some(v),
            None => m.clone().svd(true, true).solve(b, 1e-13).ok(),
        }
    };
    let mut sol = solve(&rhs)?;
    // one step of iterative refinement
    let r = &rhs - &m * &sol;
    sol += solve(&r)?;
    let mut z = vec![0.0; m_len];
    for (a, &i) in support.iter().enumerate() {
        if sol[a].is_nan() || sol[a] < 0.0 {
            return None;
        }
        z[i] = sol[a];
    }
    let total: f64 = z.iter().sum();
    z.iter_mut().for_each(|v| *v /= total);
    Some(z)
}

/// Least-norm point of the convex hull of `vectors`.
pub(crate) fn min_norm_in_hull(vectors: &[&[f64]]) -> Vec<f64> {
    let n = vectors[0].len();
    let gram: Vec<Vec<f64>> = vectors
        .iter()
        .map(|a| vectors.iter().map(|b| dot(a, b)).collect())
        .collect();
    let scale = gram.iter().enumerate().map(|(i, r)| r[i]).sum::<f64>().max(1.0);
    let zero = vec![0.0; vectors.len()];
    let combine = |lam: &[f64]| {
        let mut v = vec![0.0; n];
        for (l, a) in lam.iter().zip(vectors) {
            v.iter_mut().zip(a.iter()).for_each(|(vi, ai)| *vi += l * ai);
        }
        v
    };
    // Frank–Wolfe gap as stopping certificate
    let lam = simplex_qp(&gram, &zero, 50_000, |lam| {
        let g = mat_vec(&gram, lam);
        let gmin = g.iter().copied().fold(f64::INFINITY, f64::min);
        dot(lam, &g) - gmin <= 1e-15 * scale
    })
    .expect("nonempty hull");
    combine(&lam)
}
