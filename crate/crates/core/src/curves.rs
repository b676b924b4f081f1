//! Discrete curves and the predicates on them: self-contractedness,
//! self-expandedness, the half-space property, strong self-contractedness via
//! backward secants, plus length, reversal, arc-length resampling and the
//! tail-hull width profile.
//!
//! Every predicate reads a curve as the polygonal line through its vertices.
//! Consecutive duplicate vertices are collapsed first; witnesses always refer
//! to indices of the original vertex list.

use std::fmt;

use crate::error::{Error, Result};
use crate::geom::{DirectionSample, MeanWidthEstimate, SphereSampler};
use crate::point::{dist, dot, dot_diff, lerp, Point};

/// Ordered vertices `p_0, …, p_{m−1}` with optional strictly increasing
/// parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCurve {
    points: Vec<Point>,
    params: Option<Vec<f64>>,
}

impl DiscreteCurve {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("curve needs at least one point"))?;
        let n = first.dim();
        if let Some(p) = points.iter().find(|p| p.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: p.dim() });
        }
        Ok(DiscreteCurve { points, params: None })
    }

    pub fn with_params(points: Vec<Point>, params: Vec<f64>) -> Result<Self> {
        let mut curve = Self::new(points)?;
        if params.len() != curve.points.len() {
            return Err(Error::invalid(format!(
                "{} params for {} points",
                params.len(),
                curve.points.len()
            )));
        }
        if params.iter().any(|t| !t.is_finite()) || params.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("curve params must be finite and strictly increasing"));
        }
        curve.params = Some(params);
        Ok(curve)
    }

    /// Convenience constructor from raw coordinate rows.
    pub fn from_coords<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let points = rows
            .iter()
            .map(|r| Point::new(r.as_ref().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn params(&self) -> Option<&[f64]> {
        self.params.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn first(&self) -> &Point {
        &self.points[0]
    }

    pub fn last(&self) -> &Point {
        &self.points[self.points.len() - 1]
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    /// Vertices with consecutive exact duplicates removed, paired with the
    /// original index of each survivor.
    fn collapsed(&self) -> (Vec<&[f64]>, Vec<usize>) {
        let mut pts: Vec<&[f64]> = Vec::with_capacity(self.points.len());
        let mut idx = Vec::with_capacity(self.points.len());
        for (i, p) in self.points.iter().enumerate() {
            if pts.last().is_some_and(|q| *q == p.coords()) {
                continue;
            }
            pts.push(p.coords());
            idx.push(i);
        }
        (pts, idx)
    }
}

/// Triple of vertex indices together with by how much the checked inequality
/// failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub indices: [usize; 3],
    pub violation: f64,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [i, j, k] = self.indices;
        write!(f, "({i}, {j}, {k}) violation {:.6e}", self.violation)
    }
}

/// Outcome of a predicate. `margin` is the smallest slack seen over all the
/// inequalities that were checked (`+∞` when none applied); it is negative
/// exactly when some inequality failed before tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredicateVerdict {
    pub holds: bool,
    pub witness: Option<Witness>,
    pub margin: f64,
}

impl PredicateVerdict {
    pub fn pass(margin: f64) -> Self {
        PredicateVerdict { holds: true, witness: None, margin }
    }

    pub fn fail(witness: Witness, margin: f64) -> Self {
        PredicateVerdict { holds: false, witness: Some(witness), margin }
    }

    pub(crate) fn from_scan(first_failure: Option<Witness>, margin: f64) -> Self {
        match first_failure {
            Some(w) => Self::fail(w, margin),
            None => Self::pass(margin),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Absolute slack on distances and normalized inner products.
    pub abs_tol: f64,
    /// Relative margin demanded by strict (interior) conditions.
    pub rel_margin: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig { abs_tol: 1e-9, rel_margin: 1e-6 }
    }
}

impl ToleranceConfig {
    pub fn new(abs_tol: f64, rel_margin: f64) -> Result<Self> {
        if !(abs_tol >= 0.0 && rel_margin >= 0.0) {
            return Err(Error::invalid("tolerances must be >= 0"));
        }
        Ok(ToleranceConfig { abs_tol, rel_margin })
    }
}

/// Polygonal length `Σ ‖p_{i+1} − p_i‖`.
pub fn length(curve: &DiscreteCurve) -> f64 {
    curve.points.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

/// The time-reversed curve `t ↦ γ(−t)`.
pub fn reverse(curve: &DiscreteCurve) -> DiscreteCurve {
    DiscreteCurve {
        points: curve.points.iter().rev().cloned().collect(),
        params: curve
            .params
            .as_ref()
            .map(|ts| ts.iter().rev().map(|t| -t).collect()),
    }
}

/// Self-contractedness of the polygonal curve.
///
/// Along the polyline the distance to any later point must never increase.
/// Distance to a fixed target is convex along a segment, so the condition
/// reduces to `⟨p_{i+1} − p_i, p_k − p_{i+1}⟩ ≥ 0` for all `i + 1 < k`; the
/// normalized product may dip to `−abs_tol`. On failure the witness is the
/// first vertex triple `(i, i+1, k)` with `d(p_{i+1}, p_k) > d(p_i, p_k) +
/// abs_tol` when one exists, otherwise the first failing segment triple.
pub fn is_self_contracted(curve: &DiscreteCurve, tol: &ToleranceConfig) -> PredicateVerdict {
    let (pts, idx) = curve.collapsed();
    let mut margin = f64::INFINITY;
    let mut segment_failure = None;
    for k in 2..pts.len() {
        for i in 0..k - 1 {
            let (a, b) = (pts[i], pts[i + 1]);
            let s = dot_diff(b, a, pts[k], b) / dist(a, b);
            margin = margin.min(s);
            if s < -tol.abs_tol && segment_failure.is_none() {
                segment_failure = Some(Witness { indices: [idx[i], idx[i + 1], idx[k]], violation: -s });
            }
        }
    }
    match segment_failure {
        None => PredicateVerdict::pass(margin),
        Some(seg) => {
            let vertex = is_self_contracted_vertices(curve, tol).witness;
            PredicateVerdict::fail(vertex.unwrap_or(seg), margin)
        }
    }
}

/// Self-contractedness of the vertex sequence alone: for every `k` the
/// distances `d(p_i, p_k)`, `i = 0..k`, are nonincreasing up to `abs_tol`.
///
/// This is the right check for samples of a continuous curve, and it is the
/// monotone-distance family of a proximal sequence. `margin` is the smallest
/// `d(p_i, p_k) − d(p_{i+1}, p_k)`.
pub fn is_self_contracted_vertices(curve: &DiscreteCurve, tol: &ToleranceConfig) -> PredicateVerdict {
    let (pts, idx) = curve.collapsed();
    let mut margin = f64::INFINITY;
    let mut failure = None;
    for k in 1..pts.len() {
        let mut prev = dist(pts[0], pts[k]);
        for i in 0..k {
            let next = dist(pts[i + 1], pts[k]);
            let slack = prev - next;
            margin = margin.min(slack);
            if -slack > tol.abs_tol && failure.is_none() {
                failure = Some(Witness { indices: [idx[i], idx[i + 1], idx[k]], violation: -slack });
            }
            prev = next;
        }
    }
    PredicateVerdict::from_scan(failure, margin)
}

/// Strict self-contractedness of the vertex sequence:
/// `d(p_{i+1}, p_k) < d(p_i, p_k)` for every `i < k`, with no tolerance.
/// Equality counts as a failure, so a failing witness may carry violation 0.
pub fn is_strictly_self_contracted(curve: &DiscreteCurve) -> PredicateVerdict {
    let (pts, idx) = curve.collapsed();
    let mut margin = f64::INFINITY;
    let mut failure = None;
    for k in 1..pts.len() {
        for i in 0..k {
            let slack = dist(pts[i], pts[k]) - dist(pts[i + 1], pts[k]);
            margin = margin.min(slack);
            if slack <= 0.0 && failure.is_none() {
                failure = Some(Witness { indices: [idx[i], idx[i + 1], idx[k]], violation: -slack });
            }
        }
    }
    PredicateVerdict::from_scan(failure, margin)
}

/// Self-expandedness of the polygonal curve: on every segment `k` with
/// direction `d_k`, `⟨d_k, q − p_u⟩ ≥ −abs_tol·‖d_k‖` for every earlier vertex
/// `p_u` (`u ≤ k`) and both segment endpoints `q`. The expression is linear
/// in `q`, so endpoints suffice. Kinks carry no constraint. Witness is
/// `(u, k, k+1)`.
pub fn is_self_expanded(curve: &DiscreteCurve, tol: &ToleranceConfig) -> PredicateVerdict {
    let (pts, idx) = curve.collapsed();
    let mut margin = f64::INFINITY;
    let mut failure = None;
    for k in 0..pts.len().saturating_sub(1) {
        let (a, b) = (pts[k], pts[k + 1]);
        let nd = dist(a, b);
        for (u, &pu) in pts.iter().enumerate().take(k + 1) {
            let s = (dot_diff(b, a, a, pu) / nd).min(dot_diff(b, a, b, pu) / nd);
            margin = margin.min(s);
            if s < -tol.abs_tol && failure.is_none() {
                failure = Some(Witness { indices: [idx[u], idx[k], idx[k + 1]], violation: -s });
            }
        }
    }
    PredicateVerdict::from_scan(failure, margin)
}

/// Discrete half-space property: each later vertex lies ahead of every point
/// of each earlier segment, `⟨d_k, p_u − p_{k+1}⟩ ≥ −abs_tol·‖d_k‖·max(1,
/// ‖p_u − p_k‖)` for `u > k + 1`. Witness is `(k, k+1, u)`.
pub fn check_halfspace_property(curve: &DiscreteCurve, tol: &ToleranceConfig) -> PredicateVerdict {
    let (pts, idx) = curve.collapsed();
    let mut margin = f64::INFINITY;
    let mut failure = None;
    for k in 0..pts.len().saturating_sub(1) {
        let (a, b) = (pts[k], pts[k + 1]);
        let nd = dist(a, b);
        for u in k + 2..pts.len() {
            let scale = nd * dist(pts[u], a).max(1.0);
            let s = dot_diff(b, a, pts[u], b) / scale;
            margin = margin.min(s);
            if s < -tol.abs_tol && failure.is_none() {
                failure = Some(Witness { indices: [idx[k], idx[k + 1], idx[u]], violation: -s });
            }
        }
    }
    PredicateVerdict::from_scan(failure, margin)
}

/// Strong self-contractedness surrogate: at every interior vertex `p_k` the
/// unit backward secant `v = (p_{k−1} − p_k)/‖·‖` must satisfy
/// `⟨v, p_u − p_k⟩ ≤ −rel_margin·‖p_u − p_k‖` for all later `u`, i.e. lie
/// strictly inside the normal cone of the hull of the tail. `margin` is the
/// smallest `−⟨v, p_u − p_k⟩/‖p_u − p_k‖`. Witness is `(k−1, k, u)`.
pub fn secant_cone_check(curve: &DiscreteCurve, tol: &ToleranceConfig) -> PredicateVerdict {
    let (pts, idx) = curve.collapsed();
    let mut margin = f64::INFINITY;
    let mut failure = None;
    for k in 1..pts.len().saturating_sub(1) {
        let back = dist(pts[k - 1], pts[k]);
        for u in k + 1..pts.len() {
            let cos = dot_diff(pts[k - 1], pts[k], pts[u], pts[k]) / (back * dist(pts[u], pts[k]));
            margin = margin.min(-cos);
            let violation = cos + tol.rel_margin;
            if violation > 0.0 && failure.is_none() {
                failure = Some(Witness { indices: [idx[k - 1], idx[k], idx[u]], violation });
            }
        }
    }
    PredicateVerdict::from_scan(failure, margin)
}

/// Resamples the polyline at arc-length multiples of `spacing`, keeping the
/// original vertices. Output params are cumulative arc length, adjusted by at
/// most a few ulps so that `d(q_i, q_{i+1}) ≤ t_{i+1} − t_i` holds exactly in
/// floating point.
pub fn arc_length_reparam(curve: &DiscreteCurve, spacing: f64) -> Result<DiscreteCurve> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid(format!("spacing {spacing} must be positive")));
    }
    let (pts, _) = curve.collapsed();
    let total = length(curve);
    if pts.len() < 2 || total <= 0.0 {
        return Err(Error::ZeroLength);
    }
    if total / spacing > 1e8 {
        return Err(Error::invalid("spacing too small for the curve length"));
    }

    let mut out: Vec<Vec<f64>> = vec![pts[0].to_vec()];
    let mut arc = 0.0;
    for w in pts.windows(2) {
        let seg = dist(w[0], w[1]);
        let end = arc + seg;
        let mut j = (arc / spacing).floor() + 1.0;
        while j * spacing < end {
            let q = lerp(w[0], w[1], (j * spacing - arc) / seg);
            if out.last().is_some_and(|last| *last != q) {
                out.push(q);
            }
            j += 1.0;
        }
        if out.last().is_some_and(|last| last.as_slice() != w[1]) {
            out.push(w[1].to_vec());
        }
        arc = end;
    }

    let mut params = Vec::with_capacity(out.len());
    let mut t = 0.0f64;
    params.push(t);
    for w in out.windows(2) {
        let d = dist(&w[0], &w[1]);
        let mut next = t + d;
        while next - t < d || next <= t {
            next = next.next_up();
        }
        params.push(next);
        t = next;
    }
    DiscreteCurve::with_params(out.into_iter().map(Point::from_vec_unchecked).collect(), params)
}

/// Mean widths of the convex hulls of every tail `{p_k, …, p_{m−1}}`, all
/// computed over one shared direction sample.
#[derive(Debug, Clone)]
pub struct TailWidthProfile {
    /// Entry `k` estimates `W(conv{p_k, …})`.
    pub widths: Vec<MeanWidthEstimate>,
    /// Entry `k` estimates `W_k − W_{k+1}` with a paired standard error.
    pub decreases: Vec<MeanWidthEstimate>,
}

impl TailWidthProfile {
    pub fn values(&self) -> Vec<f64> {
        self.widths.iter().map(|w| w.value).collect()
    }
}

struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn estimate(&self) -> MeanWidthEstimate {
        let se = if self.count > 1 {
            (self.m2 / (self.count - 1) as f64).max(0.0).sqrt() / (self.count as f64).sqrt()
        } else {
            0.0
        };
        MeanWidthEstimate { value: self.mean, standard_error: se, samples: self.count }
    }
}

pub fn tail_width_profile(curve: &DiscreteCurve, sampler: &SphereSampler) -> Result<TailWidthProfile> {
    tail_width_profile_with(curve, &sampler.sample(curve.dim()))
}

pub fn tail_width_profile_with(curve: &DiscreteCurve, dirs: &DirectionSample) -> Result<TailWidthProfile> {
    if dirs.dim() != curve.dim() {
        return Err(Error::DimensionMismatch { expected: curve.dim(), found: dirs.dim() });
    }
    let m = curve.len();
    let new_acc = || Welford { count: 0, mean: 0.0, m2: 0.0 };
    let mut widths: Vec<Welford> = (0..m).map(|_| new_acc()).collect();
    let mut decreases: Vec<Welford> = (0..m.saturating_sub(1)).map(|_| new_acc()).collect();
    let mut tail = vec![0.0; m];
    for u in dirs.iter() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in (0..m).rev() {
            let s = dot(&curve.points[k], u);
            lo = lo.min(s);
            hi = hi.max(s);
            tail[k] = hi - lo;
        }
        for k in 0..m {
            widths[k].push(tail[k]);
            if k + 1 < m {
                decreases[k].push(tail[k] - tail[k + 1]);
            }
        }
    }
    Ok(TailWidthProfile {
        widths: widths.iter().map(Welford::estimate).collect(),
        decreases: decreases.iter().map(Welford::estimate).collect(),
    })
}

/// Checks that each tail-width decrease dominates `epsilon` times the step,
/// `W_k − W_{k+1} ≥ ε·‖p_k − p_{k+1}‖ − 3·SE_k`. Witness is `(k, k+1, k+1)`.
pub fn check_tail_width_decrease(
    curve: &DiscreteCurve,
    profile: &TailWidthProfile,
    epsilon: f64,
) -> PredicateVerdict {
    let mut margin = f64::INFINITY;
    let mut failure = None;
    for (k, dec) in profile.decreases.iter().enumerate() {
        let step = curve.points[k].distance(&curve.points[k + 1]);
        let slack = dec.value - epsilon * step + 3.0 * dec.standard_error;
        margin = margin.min(slack);
        if slack < 0.0 && failure.is_none() {
            failure = Some(Witness { indices: [k, k + 1, k + 1], violation: -slack });
        }
    }
    PredicateVerdict::from_scan(failure, margin)
}
