//! Convex function oracles and the built-in catalog.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::simplex::{min_norm_in_hull, simplex_qp};
use crate::error::{Error, Result};
use crate::point::{dot, norm, sub};

/// A finite convex function on ℝⁿ seen through oracles.
///
/// Only `value` and `subgradient` are mandatory. The optional hooks let the
/// proximal solver pick the cheapest exact route and let verifiers measure
/// optimality.
pub trait ConvexFunction: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Any element of `∂f(x)`.
    fn subgradient(&self, x: &[f64]) -> Vec<f64>;

    /// `∇f(x)` for differentiable functions.
    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Lipschitz constant of `∇f`, when known.
    fn gradient_lipschitz(&self) -> Option<f64> {
        None
    }

    /// Closed-form `argmin_y f(y) + ‖y − x‖²/(2t)`.
    fn exact_prox(&self, _x: &[f64], _t: f64) -> Option<Vec<f64>> {
        None
    }

    /// Structure-aware iterative prox: `(point, bound on distance to the true
    /// prox)`. Used when no closed form exists.
    fn structured_prox(&self, _x: &[f64], _t: f64, _tol: f64) -> Option<Result<(Vec<f64>, f64)>> {
        None
    }

    /// `dist(v, ∂f(x))`.
    fn subdifferential_distance(&self, _x: &[f64], _v: &[f64]) -> Option<f64> {
        None
    }

    /// Least-norm element of `∂f(x)`.
    fn min_norm_subgradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// `inf f`, possibly `−∞`, when known.
    fn infimum(&self) -> Option<f64> {
        None
    }

    fn name(&self) -> String;
}

impl fmt::Debug for dyn ConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConvexFunction({})", self.name())
    }
}

/// `f(x) = ½ xᵀAx + bᵀx + c` with `A` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: f64,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Quadratic {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: f64) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::Empty("quadratic matrix"));
        }
        if let Some(row) = a.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: row.len() });
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        if a.iter().flatten().chain(&b).any(|v| !v.is_finite()) || !c.is_finite() {
            return Err(Error::invalid("quadratic coefficients must be finite"));
        }
        let a = DMatrix::from_fn(n, n, |i, j| a[i][j]);
        let scale = a.amax().max(1.0);
        if (&a - a.transpose()).amax() > 1e-12 * scale {
            return Err(Error::invalid("quadratic matrix is not symmetric"));
        }
        let eig = a.clone().symmetric_eigen();
        if eig.eigenvalues.min() < -1e-10 * scale {
            return Err(Error::invalid("quadratic matrix is not positive semidefinite"));
        }
        Ok(Quadratic {
            a,
            b: DVector::from_vec(b),
            c,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    /// `f(x) = ½ Σ dᵢ xᵢ²`.
    pub fn diagonal(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let a = (0..n)
            .map(|i| (0..n).map(|j| if i == j { d[i] } else { 0.0 }).collect())
            .collect();
        Self::new(a, vec![0.0; n], 0.0)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.b
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(x);
        (&self.a * x + &self.b).iter().copied().collect()
    }

    /// A minimizer, when the function is bounded below.
    pub fn minimizer(&self) -> Option<Vec<f64>> {
        let scale = self.a.amax().max(1.0);
        let beta = self.eigenvectors.transpose() * &self.b;
        let mut z = DVector::zeros(self.b.len());
        for i in 0..z.len() {
            let lam = self.eigenvalues[i];
            if lam.abs() <= 1e-12 * scale {
                if beta[i].abs() > 1e-9 * self.b.amax().max(1.0) {
                    return None;
                }
            } else {
                z[i] = -beta[i] / lam;
            }
        }
        Some((&self.eigenvectors * z).iter().copied().collect())
    }
}

impl ConvexFunction for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        0.5 * xv.dot(&(&self.a * &xv)) + self.b.dot(&xv) + self.c
    }

    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        self.grad(x)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(self.grad(x))
    }

    fn gradient_lipschitz(&self) -> Option<f64> {
        Some(self.eigenvalues.max().max(0.0))
    }

    fn exact_prox(&self, x: &[f64], t: f64) -> Option<Vec<f64>> {
        // (I + tA) y = x − t b
        let n = self.dim();
        if (0..n).all(|i| (0..n).all(|j| i == j || self.a[(i, j)] == 0.0)) {
            return Some((0..n).map(|i| (x[i] - t * self.b[i]) / (1.0 + t * self.a[(i, i)])).collect());
        }
        let m = DMatrix::identity(n, n) + &self.a * t;
        let rhs = DVector::from_column_slice(x) - &self.b * t;
        let y = m.cholesky()?.solve(&rhs);
        Some(y.iter().copied().collect())
    }

    fn subdifferential_distance(&self, x: &[f64], v: &[f64]) -> Option<f64> {
        Some(norm(&sub(v, &self.grad(x))))
    }

    fn min_norm_subgradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(self.grad(x))
    }

    fn infimum(&self) -> Option<f64> {
        Some(match self.minimizer() {
            Some(xs) => self.value(&xs),
            None => f64::NEG_INFINITY,
        })
    }

    fn name(&self) -> String {
        format!("quadratic(n={})", self.dim())
    }
}

/// The one-dimensional Huber-type `C¹` function
/// `f(x) = x²` for `|x| ≤ ½`, `|x| − ¼` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Huber;

impl Huber {
    pub fn derivative(x: f64) -> f64 {
        if x.abs() <= 0.5 {
            2.0 * x
        } else {
            x.signum()
        }
    }
}

impl ConvexFunction for Huber {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        let x = x[0];
        if x.abs() <= 0.5 {
            x * x
        } else {
            x.abs() - 0.25
        }
    }

    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        vec![Self::derivative(x[0])]
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(self.subgradient(x))
    }

    fn gradient_lipschitz(&self) -> Option<f64> {
        Some(2.0)
    }

    /// Quadratic branch `x/(1+2t)` while `|x| ≤ ½ + t` (ties included),
    /// otherwise the linear branch `x − t·sign(x)`.
    fn exact_prox(&self, x: &[f64], t: f64) -> Option<Vec<f64>> {
        let x = x[0];
        Some(vec![if x.abs() <= 0.5 + t { x / (1.0 + 2.0 * t) } else { x - t * x.signum() }])
    }

    fn subdifferential_distance(&self, x: &[f64], v: &[f64]) -> Option<f64> {
        Some((v[0] - Self::derivative(x[0])).abs())
    }

    fn min_norm_subgradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(self.subgradient(x))
    }

    fn infimum(&self) -> Option<f64> {
        Some(0.0)
    }

    fn name(&self) -> String {
        "huber".into()
    }
}

/// `f(x) = λ‖x‖₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormScaled {
    lambda: f64,
    dim: usize,
}

impl NormScaled {
    pub fn new(lambda: f64, dim: usize) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) || dim == 0 {
            return Err(Error::invalid("norm function needs lambda >= 0 and dim >= 1"));
        }
        Ok(NormScaled { lambda, dim })
    }
}

impl ConvexFunction for NormScaled {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.lambda * norm(x)
    }

    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let r = norm(x);
        if r == 0.0 {
            vec![0.0; x.len()]
        } else {
            x.iter().map(|c| self.lambda * c / r).collect()
        }
    }

    /// Block soft-thresholding.
    fn exact_prox(&self, x: &[f64], t: f64) -> Option<Vec<f64>> {
        let r = norm(x);
        let shrink = if r <= self.lambda * t { 0.0 } else { 1.0 - self.lambda * t / r };
        Some(x.iter().map(|c| shrink * c).collect())
    }

    fn subdifferential_distance(&self, x: &[f64], v: &[f64]) -> Option<f64> {
        if norm(x) == 0.0 {
            Some((norm(v) - self.lambda).max(0.0))
        } else {
            Some(norm(&sub(v, &self.subgradient(x))))
        }
    }

    fn min_norm_subgradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(self.subgradient(x))
    }

    fn infimum(&self) -> Option<f64> {
        Some(0.0)
    }

    fn name(&self) -> String {
        format!("norm(lambda={})", self.lambda)
    }
}

/// `f(x) = maxᵢ ⟨aᵢ, x⟩ + bᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxAffine {
    slopes: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

/// Relative slack deciding which pieces are active at a point.
const ACTIVE_TOL: f64 = 1e-9;

impl MaxAffine {
    pub fn new(slopes: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self> {
        let n = slopes.first().ok_or(Error::Empty("max-affine pieces"))?.len();
        if n == 0 {
            return Err(Error::Empty("max-affine slope"));
        }
        if let Some(a) = slopes.iter().find(|a| a.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: a.len() });
        }
        if offsets.len() != slopes.len() {
            return Err(Error::invalid("one offset per max-affine piece"));
        }
        if slopes.iter().flatten().chain(&offsets).any(|v| !v.is_finite()) {
            return Err(Error::invalid("max-affine coefficients must be finite"));
        }
        Ok(MaxAffine { slopes, offsets })
    }

    fn piece_values(&self, x: &[f64]) -> impl Iterator<Item = f64> + '_ {
        let x = x.to_vec();
        self.slopes.iter().zip(&self.offsets).map(move |(a, b)| dot(a, &x) + b)
    }

    fn active(&self, x: &[f64]) -> Vec<&[f64]> {
        let vals: Vec<f64> = self.piece_values(x).collect();
        let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slack = ACTIVE_TOL * top.abs().max(1.0);
        self.slopes
            .iter()
            .zip(&vals)
            .filter(|(_, v)| **v >= top - slack)
            .map(|(a, _)| a.as_slice())
            .collect()
    }

    fn gram(vectors: &[&[f64]]) -> Vec<Vec<f64>> {
        vectors
            .iter()
            .map(|a| vectors.iter().map(|b| dot(a, b)).collect())
            .collect()
    }
}

impl ConvexFunction for MaxAffine {
    fn dim(&self) -> usize {
        self.slopes[0].len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.piece_values(x).fold(f64::NEG_INFINITY, f64::max)
    }

    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let (best, _) = self
            .piece_values(x)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        self.slopes[best].clone()
    }

    /// Solves the dual `max_{λ∈Δ} Σλᵢ(⟨aᵢ,x⟩+bᵢ) − (t/2)‖Σλᵢaᵢ‖²` and
    /// recovers `y = x − tΣλᵢaᵢ`. With `cᵢ = ⟨aᵢ,y⟩+bᵢ` the duality gap is
    /// `maxᵢcᵢ − Σλᵢcᵢ` and bounds `‖y − y*‖` by `√(2t·gap)`. Rounding in the
    /// `cᵢ` puts a floor under that bound; tolerances below the floor are
    /// met at the floor.
    fn structured_prox(&self, x: &[f64], t: f64, tol: f64) -> Option<Result<(Vec<f64>, f64)>> {
        let refs: Vec<&[f64]> = self.slopes.iter().map(|a| a.as_slice()).collect();
        let gram = Self::gram(&refs);
        let q: Vec<Vec<f64>> = gram.iter().map(|r| r.iter().map(|g| t * g).collect()).collect();
        let lin: Vec<f64> = self.piece_values(x).map(|c| -c).collect();
        let recover = |lam: &[f64]| -> (Vec<f64>, f64, f64) {
            let mut y = x.to_vec();
            for (l, a) in lam.iter().zip(&self.slopes) {
                y.iter_mut().zip(a).for_each(|(yi, ai)| *yi -= t * l * ai);
            }
            let c: Vec<f64> = self.piece_values(&y).collect();
            let top = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let gap = (top - dot(lam, &c)).max(0.0);
            let size = c.iter().map(|v| v.abs()).fold(1.0, f64::max);
            let floor = (2.0 * t * 64.0 * f64::EPSILON * size).sqrt();
            (y, (2.0 * t * gap).sqrt(), floor)
        };
        let accept = |res: f64, floor: f64| res <= tol.max(floor);
        Some(
            simplex_qp(&q, &lin, 200_000, |lam| {
                let (_, res, floor) = recover(lam);
                accept(res, floor)
            })
            .and_then(|lam| {
                let (y, res, floor) = recover(&lam);
                if accept(res, floor) {
                    Ok((y, res))
                } else {
                    Err(Error::SolverFailure { iterations: 200_000, residual: res })
                }
            }),
        )
    }

    fn subdifferential_distance(&self, x: &[f64], v: &[f64]) -> Option<f64> {
        let active = self.active(x);
        let shifted: Vec<Vec<f64>> = active.iter().map(|a| sub(a, v)).collect();
        let refs: Vec<&[f64]> = shifted.iter().map(|a| a.as_slice()).collect();
        Some(norm(&min_norm_in_hull(&refs)))
    }

    fn min_norm_subgradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(min_norm_in_hull(&self.active(x)))
    }

    fn name(&self) -> String {
        format!("maxaffine(pieces={})", self.slopes.len())
    }
}

pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A user-supplied convex function built from closures.
#[derive(Clone)]
pub struct CustomFunction {
    pub dim: usize,
    pub value: ValueFn,
    pub subgradient: VectorFn,
    /// Set for differentiable functions together with `lipschitz`.
    pub gradient: Option<VectorFn>,
    pub lipschitz: Option<f64>,
    pub name: String,
}

impl CustomFunction {
    pub fn new(
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        subgradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        CustomFunction {
            dim,
            value: Arc::new(value),
            subgradient: Arc::new(subgradient),
            gradient: None,
            lipschitz: None,
            name: "custom".into(),
        }
    }

    /// Declares `f` differentiable with `L`-Lipschitz gradient equal to the
    /// subgradient selector.
    pub fn smooth(mut self, lipschitz: f64) -> Self {
        self.gradient = Some(self.subgradient.clone());
        self.lipschitz = Some(lipschitz);
        self
    }
}

impl ConvexFunction for CustomFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        (self.subgradient)(x)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(x))
    }

    fn gradient_lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}
