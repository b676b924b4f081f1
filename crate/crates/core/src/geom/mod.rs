//! Euclidean primitives over finite point sets and convex bodies: support
//! functions, widths, diameter and Hausdorff distance. Sphere sampling and the
//! mean width estimator live in [`sphere`]; spherical cap measures in [`cap`].

pub mod cap;
pub mod sphere;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::point::{dist, dot, Point, UnitVector};

pub use cap::{cap_fraction, ln_cap_fraction, sigma_n};
pub use sphere::{mean_width, mean_width_with, DirectionSample, MeanWidthEstimate, SphereSampler};

/// Absolute slack used by geometric comparisons unless a caller overrides it.
pub const DEFAULT_TOL: f64 = 1e-9;

pub type SupportFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A compact convex set, described through its support function.
///
/// A `PointCloud` stands for the convex hull of its points; the hull itself is
/// never built.
#[derive(Clone)]
pub enum ConvexBody {
    PointCloud(Vec<Point>),
    Ball { center: Point, radius: f64 },
    Box { low: Point, high: Point },
    SupportOracle { dim: usize, support: SupportFn },
}

impl fmt::Debug for ConvexBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexBody::PointCloud(p) => f.debug_tuple("PointCloud").field(p).finish(),
            ConvexBody::Ball { center, radius } => f
                .debug_struct("Ball")
                .field("center", center)
                .field("radius", radius)
                .finish(),
            ConvexBody::Box { low, high } => f
                .debug_struct("Box")
                .field("low", low)
                .field("high", high)
                .finish(),
            ConvexBody::SupportOracle { dim, .. } => {
                f.debug_struct("SupportOracle").field("dim", dim).finish()
            }
        }
    }
}

impl ConvexBody {
    pub fn point_cloud(points: Vec<Point>) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("point cloud"))?;
        check_same_dim(first.dim(), &points)?;
        Ok(ConvexBody::PointCloud(points))
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("ball radius {radius} must be finite and >= 0")));
        }
        Ok(ConvexBody::Ball { center, radius })
    }

    pub fn axis_box(low: Point, high: Point) -> Result<Self> {
        if low.dim() != high.dim() {
            return Err(Error::DimensionMismatch { expected: low.dim(), found: high.dim() });
        }
        if low.iter().zip(high.iter()).any(|(l, h)| l > h) {
            return Err(Error::invalid("box low corner exceeds high corner"));
        }
        Ok(ConvexBody::Box { low, high })
    }

    pub fn oracle(dim: usize, support: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ConvexBody::SupportOracle { dim, support: Arc::new(support) }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::PointCloud(p) => p[0].dim(),
            ConvexBody::Ball { center, .. } => center.dim(),
            ConvexBody::Box { low, .. } => low.dim(),
            ConvexBody::SupportOracle { dim, .. } => *dim,
        }
    }

    /// `h_K(u)` on raw coordinates; the caller guarantees matching dimension.
    pub(crate) fn support_raw(&self, u: &[f64]) -> f64 {
        match self {
            ConvexBody::PointCloud(points) => points
                .iter()
                .map(|p| dot(p, u))
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexBody::Ball { center, radius } => dot(center, u) + radius * crate::point::norm(u),
            ConvexBody::Box { low, high } => low
                .iter()
                .zip(high.iter())
                .zip(u)
                .map(|((l, h), u)| (u * l).max(u * h))
                .sum(),
            ConvexBody::SupportOracle { support, .. } => support(u),
        }
    }

    /// Length of the projection onto `ℝu`, i.e. `h_K(u) + h_K(−u)`.
    pub(crate) fn width_raw(&self, u: &[f64]) -> f64 {
        match self {
            ConvexBody::PointCloud(points) => {
                let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    let s = dot(p, u);
                    (lo.min(s), hi.max(s))
                });
                hi - lo
            }
            ConvexBody::Ball { radius, .. } => 2.0 * radius * crate::point::norm(u),
            _ => {
                let neg: Vec<f64> = u.iter().map(|c| -c).collect();
                self.support_raw(u) + self.support_raw(&neg)
            }
        }
    }
}

fn check_same_dim(n: usize, points: &[Point]) -> Result<()> {
    match points.iter().find(|p| p.dim() != n) {
        Some(p) => Err(Error::DimensionMismatch { expected: n, found: p.dim() }),
        None => Ok(()),
    }
}

fn check_dir(body: &ConvexBody, u: &UnitVector) -> Result<()> {
    if body.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), found: u.dim() });
    }
    Ok(())
}

/// Support function `h_K(u) = max_{x∈K} ⟨u, x⟩`.
pub fn support(body: &ConvexBody, u: &UnitVector) -> Result<f64> {
    check_dir(body, u)?;
    Ok(body.support_raw(u))
}

/// Length of the orthogonal projection of `body` onto the line `ℝu`.
pub fn directional_width(body: &ConvexBody, u: &UnitVector) -> Result<f64> {
    check_dir(body, u)?;
    Ok(body.width_raw(u).max(0.0))
}

/// Largest pairwise distance, by exhaustive enumeration.
pub fn diameter<P: AsRef<[f64]>>(points: &[P]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Empty("diameter of an empty set"));
    }
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(dist(a.as_ref(), b.as_ref()));
        }
    }
    Ok(best)
}

fn directed_hausdorff<P: AsRef<[f64]>, Q: AsRef<[f64]>>(from: &[P], to: &[Q]) -> f64 {
    from.iter()
        .map(|a| {
            to.iter()
                .map(|b| dist(a.as_ref(), b.as_ref()))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff<P: AsRef<[f64]>, Q: AsRef<[f64]>>(a: &[P], b: &[Q]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("hausdorff distance needs two nonempty sets"));
    }
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        self.coords()
    }
}
