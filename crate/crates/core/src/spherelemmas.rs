//! Constructive sphere lemmas behind the length bound and the assembly of its
//! explicit constants.
//!
//! * a greedy maximal family of unit vectors with pairwise products `≤ 1/2`
//!   (such a family has at most `3ⁿ` members);
//! * the hemisphere direction `ζ`: normalizing the sum of such a family drawn
//!   from a nearly non-obtuse set gives `⟨ζ, x⟩ ≥ 3^{−(2n+1)}` on the set;
//! * `δ = 3^{−3n}`, `ε = σ_n⁻¹∫_V du / 4` for the cap `V` of chordal radius
//!   `δ²`, and `C_n = 1/ε`, so that `ℓ(γ) ≤ C_n·W(conv γ)` for every
//!   self-contracted curve.

use crate::curves::{is_self_contracted, length, DiscreteCurve, ToleranceConfig};
use crate::error::{Error, Result};
use crate::geom::{diameter, ln_cap_fraction, mean_width, ConvexBody, MeanWidthEstimate, SphereSampler};
use crate::point::{dot, norm, UnitVector};

/// Slack on the pairwise-product tests.
pub const DOT_SLACK: f64 = 1e-12;

/// Largest dimension for which constants are assembled.
pub const MAX_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SaturatedFamily {
    pub vectors: Vec<UnitVector>,
    /// Indices of the accepted vectors in the candidate list.
    pub source_indices: Vec<usize>,
    /// Largest `⟨x_i, x_j⟩` over distinct members (`−∞` for a singleton).
    pub max_pairwise_dot: f64,
}

impl SaturatedFamily {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `v = Σ x_i`.
    pub fn sum(&self) -> Vec<f64> {
        let n = self.vectors[0].dim();
        let mut v = vec![0.0; n];
        for x in &self.vectors {
            v.iter_mut().zip(x.iter()).for_each(|(a, b)| *a += b);
        }
        v
    }
}

fn check_candidates(candidates: &[UnitVector]) -> Result<usize> {
    let n = candidates.first().ok_or(Error::Empty("candidate set"))?.dim();
    for x in candidates {
        if x.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.dim() });
        }
        if (norm(x) - 1.0).abs() > DOT_SLACK {
            return Err(Error::invalid("candidate is not a unit vector"));
        }
    }
    Ok(n)
}

/// Scans `candidates` in order and keeps `x` when `⟨x, y⟩ ≤ 1/2` for every
/// vector `y` kept so far. The result is maximal within the candidates.
pub fn greedy_saturated_family(candidates: &[UnitVector]) -> Result<SaturatedFamily> {
    check_candidates(candidates)?;
    let mut vectors: Vec<UnitVector> = Vec::new();
    let mut source_indices = Vec::new();
    let mut max_pairwise_dot = f64::NEG_INFINITY;
    for (i, x) in candidates.iter().enumerate() {
        let worst = vectors.iter().map(|y| dot(x, y)).fold(f64::NEG_INFINITY, f64::max);
        if worst <= 0.5 {
            max_pairwise_dot = max_pairwise_dot.max(worst);
            vectors.push(x.clone());
            source_indices.push(i);
        }
    }
    Ok(SaturatedFamily { vectors, source_indices, max_pairwise_dot })
}

/// Lower bound `3^{−(n+1)}` on `−⟨x, y⟩` under which a common hemisphere direction exists.
pub fn hemisphere_hypothesis_threshold(n: usize) -> f64 {
    3f64.powi(-(n as i32 + 1))
}

/// Guaranteed lower bound `3^{−(2n+1)}` on `⟨ζ, x⟩`.
pub fn zeta_bound(n: usize) -> f64 {
    3f64.powi(-(2 * n as i32 + 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HemisphereDirection {
    pub zeta: UnitVector,
    pub family: SaturatedFamily,
    /// `‖v‖²` for the unnormalized sum `v` of the family.
    pub sum_norm_sq: f64,
    /// `min_{x∈Σ} ⟨ζ, x⟩`.
    pub min_dot: f64,
}

/// Direction `ζ` making a uniformly acute angle with every vector of `sigma`.
///
/// Requires `⟨x, y⟩ ≥ −3^{−(n+1)}` for all pairs (checked with
/// [`DOT_SLACK`]); violating inputs are rejected with the offending pair.
pub fn hemisphere_direction(sigma: &[UnitVector]) -> Result<HemisphereDirection> {
    let n = check_candidates(sigma)?;
    let threshold = hemisphere_hypothesis_threshold(n);
    for (i, x) in sigma.iter().enumerate() {
        for (j, y) in sigma.iter().enumerate().skip(i + 1) {
            let d = dot(x, y);
            if d < -threshold - DOT_SLACK {
                return Err(Error::HypothesisViolated { i, j, dot: d, threshold: -threshold });
            }
        }
    }
    let family = greedy_saturated_family(sigma)?;
    let v = family.sum();
    let sum_norm_sq = dot(&v, &v);
    // the sum has ⟨v, y⟩ ≥ 3^{−(n+1)} > 0 for every y, so it cannot vanish
    let zeta = UnitVector::normalize(v)?;
    let min_dot = sigma.iter().map(|x| dot(&zeta, x)).fold(f64::INFINITY, f64::min);
    Ok(HemisphereDirection { zeta, family, sum_norm_sq, min_dot })
}

/// Explicit constants of the length bound in dimension `n`.
///
/// For `n ≥ 11` the cap fraction underflows `f64`, so `epsilon` is 0 and
/// `c_n` is `+∞`; the logarithms stay exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub n: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub c_n: f64,
    pub ln_epsilon: f64,
    pub zeta_bound: f64,
}

pub fn bound_constants(n: usize) -> Result<BoundConstants> {
    if !(2..=MAX_DIM).contains(&n) {
        return Err(Error::invalid(format!("bound constants need 2 <= n <= {MAX_DIM}, got {n}")));
    }
    let delta = 3f64.powi(-3 * n as i32);
    let ln_epsilon = ln_cap_fraction(n, delta * delta)? - 4f64.ln();
    let epsilon = ln_epsilon.exp();
    Ok(BoundConstants {
        n,
        delta,
        epsilon,
        c_n: (-ln_epsilon).exp(),
        ln_epsilon,
        zeta_bound: zeta_bound(n),
    })
}

/// Constants for curves in ℝⁿ. A curve in ℝ¹ is treated through the
/// isometric embedding ℝ ⊂ ℝ², which keeps self-contractedness and length.
pub fn bound_constants_for_dim(n: usize) -> Result<BoundConstants> {
    bound_constants(n.max(2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthBoundReport {
    pub length: f64,
    pub mean_width: MeanWidthEstimate,
    pub diameter: f64,
    pub c_n: f64,
    /// `ℓ / W`; `NaN` when `W = 0`.
    pub ratio: f64,
    /// `ℓ ≤ C_n·W + 3·SE`.
    pub holds: bool,
    /// `ℓ ≤ C_n·diam`.
    pub diameter_bound_holds: bool,
}

/// Checks `ℓ(γ) ≤ C_n·W(conv γ)` on a self-contracted curve.
pub fn verify_length_bound(
    curve: &DiscreteCurve,
    sampler: &SphereSampler,
    tol: &ToleranceConfig,
) -> Result<LengthBoundReport> {
    let sc = is_self_contracted(curve, tol);
    if let Some(witness) = sc.witness {
        return Err(Error::NotSelfContracted { witness });
    }
    let consts = bound_constants_for_dim(curve.dim())?;
    let len = length(curve);
    let body = ConvexBody::point_cloud(curve.points().to_vec())?;
    let w = mean_width(&body, sampler)?;
    let diam = diameter(curve.points())?;
    Ok(LengthBoundReport {
        length: len,
        mean_width: w,
        diameter: diam,
        c_n: consts.c_n,
        ratio: if w.value > 0.0 { len / w.value } else { f64::NAN },
        holds: len <= consts.c_n * w.value + 3.0 * w.standard_error,
        diameter_bound_holds: len <= consts.c_n * diam,
    })
}
