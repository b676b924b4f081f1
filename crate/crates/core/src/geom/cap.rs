//! Surface measure of 𝕊ⁿ⁻¹ and the normalized measure of spherical caps.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `Γ(k/2)` for a positive integer `k`.
fn gamma_half(k: u32) -> f64 {
    debug_assert!(k >= 1);
    let (mut g, mut x) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = k as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// Surface measure of 𝕊ⁿ⁻¹: `σ_n = n π^{n/2} / Γ(n/2 + 1)`.
pub fn sigma_n(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::invalid("sphere dimension n must be >= 1"));
    }
    let nf = n as f64;
    Ok(nf * PI.powf(nf / 2.0) / gamma_half(n as u32 + 2))
}

/// `∫₀^π sin^{n−2}φ dφ = σ_n / σ_{n−1}`, in closed form.
fn polar_normalizer(n: usize) -> f64 {
    PI.sqrt() * gamma_half(n as u32 - 1) / gamma_half(n as u32)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

/// Adaptive Simpson quadrature with an absolute tolerance.
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn check_cap_args(n: usize, chordal_radius: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid("cap fraction needs n >= 2"));
    }
    if !(chordal_radius > 0.0 && chordal_radius <= 2.0) {
        return Err(Error::invalid(format!(
            "chordal radius {chordal_radius} outside (0, 2]"
        )));
    }
    Ok(())
}

/// Natural log of [`cap_fraction`]; stays finite where the fraction itself
/// underflows (tiny radii in high dimension).
///
/// With `θ = 2 asin(r/2)` the angular radius and `k = n − 2`,
/// `∫₀^θ sin^k φ dφ = θ^{k+1} ∫₀¹ s^k sinc(θs)^k ds`; the rescaled integral is
/// of order one and is integrated adaptively to absolute accuracy 1e−12.
pub fn ln_cap_fraction(n: usize, chordal_radius: f64) -> Result<f64> {
    check_cap_args(n, chordal_radius)?;
    let theta = 2.0 * (chordal_radius / 2.0).asin();
    let k = (n - 2) as i32;
    let integrand = |s: f64| s.powi(k) * sinc(theta * s).powi(k);
    let scaled = if k == 0 { 1.0 } else { adaptive_simpson(&integrand, 0.0, 1.0, 1e-12) };
    let ln = (k + 1) as f64 * theta.ln() + scaled.ln() - polar_normalizer(n).ln();
    Ok(ln.min(0.0))
}

/// Fraction `σ_n⁻¹ ∫_V du` of the sphere covered by the cap
/// `V = {v ∈ 𝕊ⁿ⁻¹ : ‖v − pole‖ ≤ r}`.
pub fn cap_fraction(n: usize, chordal_radius: f64) -> Result<f64> {
    Ok(ln_cap_fraction(n, chordal_radius)?.exp())
}
