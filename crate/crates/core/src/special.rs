//! The mollifier `w`, the half-order kernel `ψ`, and the aliasing
//! function `Ψ(h; a, r)`.
//!
//! `ψ(q) = ½ ∫₀^∞ w(q + p) p^{-1/2} dp` is evaluated in closed form.
//! With `p = u²` the integral becomes `∫ w(q + u²) du`, a degree-8
//! polynomial in `u`, which is exact and well conditioned for moderate
//! `q`. For `q < -2` the polynomial antiderivative cancels badly, so
//! there `ψ` is summed from the binomial expansion of `(s - q)^{-1/2}`
//! against the exact even moments of `w`, which converges geometrically
//! in `1/q²`.
//!
//! `Ψ(h; a, r) = Σₖ [ψ(a(k - r) + h) - ψ(a(k - r))]` is reduced to
//! `a > 0`, `r ∈ [0, 1)`, `h ∈ [0, a)` using its reflection and
//! periodicity identities, summed directly over `k > -K`, and the slowly
//! decaying tail `k ≤ -K` is closed with a Hurwitz zeta asymptotic.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Normalisation of `w(t) = (15/16)(1 - t²)²₊`.
pub const MOLLIFIER_SCALE: f64 = 15.0 / 16.0;

/// Support half-width of the mollifier.
pub const MOLLIFIER_HALF_WIDTH: f64 = 1.0;

/// Below this argument `ψ` switches from the polynomial antiderivative to
/// the moment expansion.
const SERIES_SWITCH: f64 = -2.0;

/// Number of even moments kept in the expansion; at `q = -2` the last
/// retained term is below `4^{-40}`.
const SERIES_TERMS: usize = 40;

/// The experiment mollifier `w(t) = (15/16)(1 - t²)²` on `|t| < 1`.
#[inline]
pub fn mollifier(t: f64) -> f64 {
    if t.abs() >= MOLLIFIER_HALF_WIDTH {
        0.0
    } else {
        let s = 1.0 - t * t;
        MOLLIFIER_SCALE * s * s
    }
}

/// `w'(t) = -(15/4) t (1 - t²)` on `|t| < 1`.
#[inline]
pub fn mollifier_deriv(t: f64) -> f64 {
    if t.abs() >= MOLLIFIER_HALF_WIDTH {
        0.0
    } else {
        -3.75 * t * (1.0 - t * t)
    }
}

/// `∫ w(t) tⁿ dt`. Odd moments vanish; `m₀ = 1`.
pub fn mollifier_moment(n: u32) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    // (15/8) [1/(n+1) - 2/(n+3) + 1/(n+5)] over a common denominator
    let n = n as f64;
    15.0 / ((n + 1.0) * (n + 3.0) * (n + 5.0))
}

fn series_coefficients() -> &'static [f64; SERIES_TERMS] {
    static COEFFS: OnceLock<[f64; SERIES_TERMS]> = OnceLock::new();
    COEFFS.get_or_init(|| {
        // binom(-1/2, n) for even n = 2j, times the moment m_{2j}.
        let mut out = [0.0; SERIES_TERMS];
        let mut binom = 1.0;
        for (j, c) in out.iter_mut().enumerate() {
            let n = 2 * j;
            if j > 0 {
                // two recurrence steps binom(-1/2, m) = binom(-1/2, m-1) * (-1/2 - m + 1) / m
                for m in [n - 1, n] {
                    binom *= (-0.5 - (m as f64) + 1.0) / m as f64;
                }
            }
            *c = binom * mollifier_moment(n as u32);
        }
        out
    })
}

/// Closed-form `ψ(q)`.
pub fn psi(q: f64) -> f64 {
    if q >= 1.0 {
        return 0.0;
    }
    if q < SERIES_SWITCH {
        let m = -q;
        let x = 1.0 / (m * m);
        let sum = series_coefficients()
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c);
        return 0.5 * sum / m.sqrt();
    }
    let q2 = q * q;
    let c0 = (1.0 - q2) * (1.0 - q2);
    let c1 = 4.0 * q * (q2 - 1.0) / 3.0;
    let c2 = (6.0 * q2 - 2.0) / 5.0;
    let c3 = 4.0 * q / 7.0;
    let c4 = 1.0 / 9.0;
    let antideriv = |u: f64| {
        let u2 = u * u;
        u * (c0 + u2 * (c1 + u2 * (c2 + u2 * (c3 + u2 * c4))))
    };
    let upper = (1.0 - q).sqrt();
    let lower = (-1.0 - q).max(0.0).sqrt();
    MOLLIFIER_SCALE * (antideriv(upper) - antideriv(lower))
}

/// Independent evaluation of `ψ(q)` by adaptive Gauss–Kronrod quadrature
/// of the defining integral, used to check [`psi`].
///
/// The `p^{-1/2}` endpoint singularity (present when `q > -1`) is removed
/// by substituting `p = u²` on a short leading piece only; the rest of the
/// range is integrated in `p` directly.
pub fn psi_quadrature(q: f64) -> Result<f64> {
    if q >= 1.0 {
        return Ok(0.0);
    }
    const TOL: f64 = 1e-14;
    const MAX_PIECES: usize = 4000;
    let hi = 1.0 - q;
    let lo = (-1.0 - q).max(0.0);
    let f = |p: f64| 0.5 * mollifier(q + p) / p.sqrt();
    if lo > 0.0 {
        return quadrature::adaptive(lo, hi, TOL, MAX_PIECES, f);
    }
    let split = 0.25 * hi;
    let head = quadrature::adaptive(0.0, split.sqrt(), TOL, MAX_PIECES, |u| mollifier(q + u * u))?;
    let rest = quadrature::adaptive(split, hi, TOL, MAX_PIECES, f)?;
    Ok(head + rest)
}

/// Numerical settings for [`big_psi`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiEvalConfig {
    /// `|t|` beyond which `Δψ(t, h)` uses `h / (4|t|^{3/2})`.
    pub asymptotic_threshold: f64,
    /// First index `K` of the tail closed by the Hurwitz zeta asymptotic.
    pub tail_start: u32,
}

impl Default for PsiEvalConfig {
    fn default() -> Self {
        PsiEvalConfig {
            asymptotic_threshold: 1.0e4,
            tail_start: 10_000,
        }
    }
}

impl PsiEvalConfig {
    /// Every `Δψ` term summed exactly; for correctness checks.
    pub fn exact() -> Self {
        PsiEvalConfig {
            asymptotic_threshold: 1.0e6,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.asymptotic_threshold >= 10.0) {
            return Err(Error::config(
                "psi.asymptotic_threshold",
                format!("must be >= 10, got {}", self.asymptotic_threshold),
            ));
        }
        if self.tail_start < 1000 {
            return Err(Error::config(
                "psi.tail_start",
                format!("must be >= 1000, got {}", self.tail_start),
            ));
        }
        Ok(())
    }
}

/// `Δψ(t, h) = ψ(t + h) - ψ(t)`, with the large-negative-`t` branch
/// `h / (4|t|^{3/2})` once `t < -threshold`.
#[inline]
pub fn delta_psi(t: f64, h: f64, threshold: f64) -> f64 {
    if t >= 1.0 && t + h >= 1.0 {
        return 0.0;
    }
    if t < -threshold {
        let m = -t;
        return h / (4.0 * m * m.sqrt());
    }
    psi(t + h) - psi(t)
}

/// `ζ(3/2, t) = Σ_{k≥0} (k + t)^{-3/2}` for `t = K + offset`, from its
/// large-`t` asymptotic expansion
/// `2t^{-1/2} + ½t^{-3/2} + Σ B₂ₙ/(2n)! (3/2)₂ₙ₋₁ t^{-2n-1/2}`
/// carried through `n = 3`. Requires `t ≥ 10`, where the truncation
/// error is below `10^{-10}`.
pub fn hurwitz_tail(k: u64, offset: f64) -> Result<f64> {
    let t = k as f64 + offset;
    if !(t >= 10.0) {
        return Err(Error::Precondition(format!(
            "Hurwitz tail needs K + offset >= 10, got {t}"
        )));
    }
    // B₂/2! (3/2), B₄/4! (3/2)₃, B₆/6! (3/2)₅
    const C1: f64 = 1.0 / 8.0;
    const C2: f64 = -105.0 / 5760.0;
    const C3: f64 = 10395.0 / 967_680.0;
    let inv = 1.0 / t;
    let inv2 = inv * inv;
    let head = 2.0 * inv.sqrt() + 0.5 * inv * inv.sqrt();
    let corr = inv2 * inv.sqrt() * (C1 + inv2 * (C2 + inv2 * C3));
    Ok(head + corr)
}

/// The aliasing function `Ψ(h; a, r)`; `Ψ(h; 0, r) = 0`.
pub fn big_psi(h: f64, a: f64, r: f64, cfg: &PsiEvalConfig) -> f64 {
    if a == 0.0 || !a.is_finite() {
        return 0.0;
    }
    let (a, r) = if a < 0.0 { (-a, -r) } else { (a, r) };
    let r = wrap(r, 1.0);
    let h = wrap(h, a);
    if h == 0.0 {
        return 0.0;
    }
    let k_tail = cfg.tail_start as i64;
    // Terms with a(k - r) >= 1 vanish for every h in [0, a).
    let last = (r + 1.0 / a).ceil() as i64;
    let mut sum = 0.0;
    for k in (-k_tail + 1)..=last {
        sum += delta_psi(a * (k as f64 - r), h, cfg.asymptotic_threshold);
    }
    let tail = hurwitz_tail(cfg.tail_start as u64, r).expect("tail_start >= 10");
    sum + h / (4.0 * a * a.sqrt()) * tail
}

/// `x mod period` into `[0, period)`.
fn wrap(x: f64, period: f64) -> f64 {
    let y = x.rem_euclid(period);
    if y >= period {
        y - period
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mollifier_values() {
        assert_eq!(mollifier(0.0), 15.0 / 16.0);
        assert_eq!(mollifier(1.0), 0.0);
        assert_eq!(mollifier(-1.0), 0.0);
        assert_eq!(mollifier(0.5), 0.52734375);
        assert_eq!(mollifier(3.0), 0.0);
    }

    #[test]
    fn mollifier_is_normalised_and_c1() {
        assert_eq!(mollifier_moment(0), 1.0);
        assert!((mollifier_moment(2) - 1.0 / 7.0).abs() < 1e-16);
        assert_eq!(mollifier_moment(3), 0.0);
        assert_eq!(mollifier_deriv(1.0), 0.0);
        assert!(mollifier_deriv(1.0 - 1e-9).abs() < 1e-8);
        // derivative against a central difference
        for &t in &[-0.7, -0.2, 0.1, 0.55, 0.9] {
            let fd = (mollifier(t + 1e-6) - mollifier(t - 1e-6)) / 2e-6;
            assert!((fd - mollifier_deriv(t)).abs() < 1e-8);
        }
    }

    #[test]
    fn psi_known_values() {
        assert_eq!(psi(2.0), 0.0);
        assert_eq!(psi(1.0), 0.0);
        assert!((psi(0.0) - 2.0 / 3.0).abs() < 1e-15);
        let big = psi(-1.0e4);
        assert!((big - 0.005).abs() < 1e-9, "{big}");
    }

    #[test]
    fn psi_branches_meet() {
        let below = psi(SERIES_SWITCH - 1e-12);
        let above = psi(SERIES_SWITCH + 1e-12);
        assert!((below - above).abs() < 1e-12);
    }

    #[test]
    fn psi_matches_quadrature() {
        for &q in &[-1.0, -0.5, 0.0, 0.3, 0.999, -1.5, -2.0, -7.3, -50.0] {
            let oracle = psi_quadrature(q).unwrap();
            assert!((psi(q) - oracle).abs() < 1e-12, "q={q}: {} vs {oracle}", psi(q));
        }
        assert_eq!(psi_quadrature(1.5).unwrap(), 0.0);
    }

    #[test]
    fn delta_psi_branches() {
        assert_eq!(delta_psi(5.0, 0.3, 50.0), 0.0);
        assert!((delta_psi(-1e6, 1.0, 50.0) - 2.5e-10).abs() < 1e-22);
        let exact = psi(-0.25) - psi(-0.5);
        assert_eq!(delta_psi(-0.5, 0.25, 50.0), exact);
    }

    #[test]
    fn hurwitz_tail_leading_terms() {
        assert!((hurwitz_tail(100, 0.0).unwrap() - 0.2005).abs() < 2e-6);
        assert!((hurwitz_tail(10_000, 0.0).unwrap() - 0.0200005).abs() < 1e-9);
        assert!(hurwitz_tail(5, 0.0).is_err());
    }

    #[test]
    fn big_psi_trivial_cases() {
        let cfg = PsiEvalConfig::default();
        assert_eq!(big_psi(0.0, 2.0, 1.0 / 3.0, &cfg), 0.0);
        assert_eq!(big_psi(0.37, 0.0, 0.2, &cfg), 0.0);
        assert_eq!(big_psi(4.0, 2.0, 0.1, &cfg), 0.0);
        let a = big_psi(0.7, 2.0, 1.0 / 3.0, &cfg);
        let b = big_psi(2.7, 2.0, 1.0 / 3.0, &cfg);
        assert!((a - b).abs() <= 1e-8);
        assert!(a != 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(PsiEvalConfig::default().validate().is_ok());
        let bad = PsiEvalConfig {
            asymptotic_threshold: 5.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = PsiEvalConfig {
            tail_start: 10,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
