//! Reproducible uniform sampling of 𝕊ⁿ⁻¹ and Monte-Carlo mean width.
//!
//! Directions are standard Gaussian vectors normalized to unit length, drawn
//! from a `ChaCha8Rng` seeded with `seed_from_u64(seed)`. The same seed and
//! count always produce the same directions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::ConvexBody;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereSampler {
    pub seed: u64,
    pub count: usize,
}

impl SphereSampler {
    pub fn new(seed: u64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("sphere sample count must be positive"));
        }
        Ok(SphereSampler { seed, count })
    }

    /// Draws `count` directions in ℝⁿ.
    pub fn sample(&self, n: usize) -> DirectionSample {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut data = Vec::with_capacity(self.count * n);
        let mut buf = vec![0.0; n];
        for _ in 0..self.count {
            fill_unit_gaussian(&mut rng, &mut buf);
            data.extend_from_slice(&buf);
        }
        DirectionSample { dim: n, data }
    }
}

/// Writes a uniformly distributed unit vector into `buf`.
pub(crate) fn fill_unit_gaussian<R: Rng + ?Sized>(rng: &mut R, buf: &mut [f64]) {
    loop {
        for c in buf.iter_mut() {
            *c = rng.sample(StandardNormal);
        }
        let nrm = crate::point::norm(buf);
        // a Gaussian vector of norm ~0 has no usable direction; redraw
        if nrm > 1e-300 {
            buf.iter_mut().for_each(|c| *c /= nrm);
            return;
        }
    }
}

/// A flat batch of unit directions sharing one dimension.
#[derive(Debug, Clone)]
pub struct DirectionSample {
    dim: usize,
    data: Vec<f64>,
}

impl DirectionSample {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanWidthEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub samples: usize,
}

impl MeanWidthEstimate {
    /// Mean and standard error (`std/√N`, unbiased variance) of the samples.
    pub(crate) fn from_samples(values: impl Iterator<Item = f64>) -> Self {
        // Welford
        let (mut count, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
        for v in values {
            count += 1;
            let delta = v - mean;
            mean += delta / count as f64;
            m2 += delta * (v - mean);
        }
        let se = if count > 1 {
            (m2 / (count - 1) as f64).max(0.0).sqrt() / (count as f64).sqrt()
        } else {
            0.0
        };
        MeanWidthEstimate { value: mean.max(0.0), standard_error: se, samples: count }
    }
}

/// Monte-Carlo estimate of the mean width `W(K)`.
pub fn mean_width(body: &ConvexBody, sampler: &SphereSampler) -> Result<MeanWidthEstimate> {
    if sampler.count < 2 {
        return Err(Error::invalid("mean width needs at least 2 directions"));
    }
    mean_width_with(body, &sampler.sample(body.dim()))
}

/// Mean width over a pre-drawn direction sample.
pub fn mean_width_with(body: &ConvexBody, dirs: &DirectionSample) -> Result<MeanWidthEstimate> {
    if dirs.dim() != body.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), found: dirs.dim() });
    }
    if dirs.len() < 2 {
        return Err(Error::invalid("mean width needs at least 2 directions"));
    }
    Ok(MeanWidthEstimate::from_samples(
        dirs.iter().map(|u| body.width_raw(u).max(0.0)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn directions_are_unit_and_deterministic() {
        let s = SphereSampler::new(7, 500).unwrap();
        let a = s.sample(3);
        let b = s.sample(3);
        assert_eq!(a.data, b.data);
        assert_eq!(a.len(), 500);
        for u in a.iter() {
            assert!((crate::point::norm(u) - 1.0).abs() < 1e-12);
        }
        let c = SphereSampler::new(8, 500).unwrap().sample(3);
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn mean_width_of_ball_and_segment() {
        let s = SphereSampler::new(42, 100_000).unwrap();
        let ball = ConvexBody::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        let w = mean_width(&ball, &s).unwrap();
        assert!((w.value - 2.0).abs() < 0.02);

        let len = 3.0;
        let seg = ConvexBody::point_cloud(vec![p(&[0.0, 0.0]), p(&[len, 0.0])]).unwrap();
        let w = mean_width(&seg, &s).unwrap();
        let exact = 2.0 * len / std::f64::consts::PI;
        assert!((w.value - exact).abs() < 0.01 * exact);
        assert!((w.value - exact).abs() < 3.0 * w.standard_error + 1e-12);
    }

    #[test]
    fn mean_width_of_a_point_is_zero() {
        let s = SphereSampler::new(1, 1000).unwrap();
        let single = ConvexBody::point_cloud(vec![p(&[1.0, 2.0, 3.0])]).unwrap();
        let w = mean_width(&single, &s).unwrap();
        assert_eq!(w.value, 0.0);
        assert_eq!(w.standard_error, 0.0);
    }

    #[test]
    fn mean_width_needs_two_samples() {
        let s = SphereSampler::new(1, 1).unwrap();
        let ball = ConvexBody::ball(p(&[0.0]), 1.0).unwrap();
        assert!(mean_width(&ball, &s).is_err());
        assert!(SphereSampler::new(1, 0).is_err());
    }
}
