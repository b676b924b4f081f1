//! Points and unit vectors of ℝⁿ plus the handful of slice helpers the rest
//! of the crate leans on.

use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};

/// Slack allowed on `‖u‖ = 1` for a [`UnitVector`].
pub const UNIT_TOL: f64 = 1e-12;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `⟨a − b, c − e⟩` without allocating.
#[inline]
pub fn dot_diff(a: &[f64], b: &[f64], c: &[f64], e: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(c.iter().zip(e))
        .map(|((a, b), (c, e))| (a - b) * (c - e))
        .sum()
}

/// `a + s·(b − a)`
#[inline]
pub fn lerp(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
}

/// A point of ℝⁿ with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Empty("point coordinates"));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate {c}")));
        }
        Ok(Point(coords))
    }

    pub fn origin(n: usize) -> Self {
        Point(vec![0.0; n.max(1)])
    }

    /// Builds a point from coordinates produced by arithmetic on finite points.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn distance(&self, other: &Point) -> f64 {
        dist(&self.0, &other.0)
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<&[f64]> for Point {
    fn from(c: &[f64]) -> Self {
        Point(c.to_vec())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A direction on 𝕊ⁿ⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Accepts `coords` only if it already has unit norm within [`UNIT_TOL`].
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Empty("unit vector coordinates"));
        }
        let n = norm(&coords);
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::invalid(format!("vector norm {n} is not 1")));
        }
        Ok(UnitVector(coords))
    }

    /// Normalizes `coords`; fails on the zero vector.
    pub fn normalize(mut coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if coords.is_empty() || !n.is_finite() || n == 0.0 {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        coords.iter_mut().for_each(|c| *c /= n);
        Ok(UnitVector(coords))
    }

    /// The `i`-th canonical basis vector of ℝⁿ.
    pub fn basis(n: usize, i: usize) -> Self {
        assert!(i < n, "basis index {i} out of range for dimension {n}");
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        UnitVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        UnitVector(self.0.iter().map(|c| -c).collect())
    }
}

impl Deref for UnitVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_points() {
        assert!(Point::new(vec![1.0, f64::NAN]).is_err());
        assert!(Point::new(vec![]).is_err());
        assert!(Point::new(vec![0.0]).is_ok());
    }

    #[test]
    fn unit_vector_checks_norm() {
        assert!(UnitVector::new(vec![1.0, 1.0]).is_err());
        let u = UnitVector::normalize(vec![3.0, 4.0]).unwrap();
        assert!((u[0] - 0.6).abs() < 1e-15 && (u[1] - 0.8).abs() < 1e-15);
        assert!(UnitVector::normalize(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn distance_is_euclidean() {
        let a = Point::new(vec![0.0, 0.0]).unwrap();
        let b = Point::new(vec![3.0, 4.0]).unwrap();
        assert_eq!(a.distance(&b), 5.0);
        assert_eq!(dot_diff(&[1.0, 0.0], &[0.0, 0.0], &[2.0, 3.0], &[1.0, 1.0]), 1.0);
    }
}
