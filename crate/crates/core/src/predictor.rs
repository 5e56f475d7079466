//! Leading-order aliasing prediction `Σ_j c_j Ψ(u₀ⱼ·x̌; κμ₀ⱼ, k⋆ⱼ)` and
//! its comparison with reconstructed profiles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{SamplingScheme, TangencyDescriptor, Vec2};
use crate::recon::AliasProfile;
use crate::special::{big_psi, PsiEvalConfig};

/// Prediction at the dimensionless displacement `x̌` from `x₀`.
pub fn predict_at(descs: &[TangencyDescriptor], scheme: &SamplingScheme, xcheck: Vec2, cfg: &PsiEvalConfig) -> f64 {
    let kappa = scheme.kappa();
    descs
        .iter()
        .map(|d| d.amplitude * big_psi(d.u0.dot(xcheck), kappa * d.mu0, d.k_star, cfg))
        .sum()
}

/// Fills the prediction side of `profile` at `x̌ = hΘ`.
pub fn predict_profile(
    profile: &mut AliasProfile,
    descs: &[TangencyDescriptor],
    scheme: &SamplingScheme,
    cfg: &PsiEvalConfig,
) {
    let theta = profile.theta;
    let values: Vec<f64> = profile
        .samples
        .par_iter()
        .map(|s| predict_at(descs, scheme, theta * s.h, cfg))
        .collect();
    for (s, v) in profile.samples.iter_mut().zip(values) {
        s.predicted = v;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMetrics {
    /// `sup_h |recon_scaled - predicted|`.
    pub sup_mismatch: f64,
    /// Peak-to-peak of the prediction.
    pub peak_to_peak: f64,
    /// `sup_mismatch / peak_to_peak`.
    pub relative: f64,
    pub samples: usize,
}

pub fn compare(profile: &AliasProfile) -> Result<ComparisonMetrics> {
    let mut sup: f64 = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &profile.samples {
        sup = sup.max((s.recon_scaled - s.predicted).abs());
        lo = lo.min(s.predicted);
        hi = hi.max(s.predicted);
    }
    let peak_to_peak = hi - lo;
    if !(peak_to_peak > 0.0) {
        return Err(Error::DegenerateProfile);
    }
    Ok(ComparisonMetrics {
        sup_mismatch: sup,
        peak_to_peak,
        relative: sup / peak_to_peak,
        samples: profile.samples.len(),
    })
}

/// Largest `|a - b|` between two profiles sampled at the same `h`, taken
/// over the reconstruction side.
pub fn recon_difference(a: &AliasProfile, b: &AliasProfile) -> f64 {
    a.samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| (x.recon_scaled - y.recon_scaled).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{tangency_enumerate, DiskPhantom, RadonFamily};
    use crate::recon::symmetric_samples;

    fn crt_setup(delta_f: f64) -> (Vec<TangencyDescriptor>, SamplingScheme) {
        let scheme = SamplingScheme::line_half_turn(0.02, 200, 0.03);
        let phantom = DiskPhantom::new(Vec2::new(0.0, 0.0), 5.0, delta_f).unwrap();
        let descs = tangency_enumerate(&RadonFamily::Line, &phantom, Vec2::new(5.0, 7.0), &scheme.window, &scheme).unwrap();
        (descs, scheme)
    }

    fn probe_points() -> Vec<Vec2> {
        vec![Vec2::new(0.4, -1.3), Vec2::new(2.5, 0.7), Vec2::new(-6.1, 3.3)]
    }

    #[test]
    fn crt_amplitude() {
        let (descs, _) = crt_setup(1.0);
        assert_eq!(descs.len(), 2);
        for d in &descs {
            assert!((d.amplitude + 0.790_569_415_042_094_9).abs() < 1e-9, "{}", d.amplitude);
        }
    }

    #[test]
    fn zero_displacement_predicts_zero() {
        let (descs, scheme) = crt_setup(1.0);
        assert_eq!(predict_at(&descs, &scheme, Vec2::new(0.0, 0.0), &PsiEvalConfig::default()), 0.0);
    }

    #[test]
    fn index_and_sign_invariances() {
        let (descs, scheme) = crt_setup(1.0);
        let cfg = PsiEvalConfig::default();
        let shifted: Vec<_> = descs
            .iter()
            .map(|d| TangencyDescriptor {
                k_star: d.k_star + 1.0,
                ..*d
            })
            .collect();
        let mirrored: Vec<_> = descs
            .iter()
            .map(|d| TangencyDescriptor {
                k_star: -d.k_star,
                mu0: -d.mu0,
                ..*d
            })
            .collect();
        for x in probe_points() {
            let base = predict_at(&descs, &scheme, x, &cfg);
            assert!((predict_at(&shifted, &scheme, x, &cfg) - base).abs() <= 1e-8);
            assert!((predict_at(&mirrored, &scheme, x, &cfg) - base).abs() <= 1e-8);
        }
    }

    #[test]
    fn linear_in_jump() {
        let (d1, scheme) = crt_setup(1.0);
        let (d3, _) = crt_setup(-3.0);
        let (d0, _) = crt_setup(0.0);
        let cfg = PsiEvalConfig::default();
        for x in probe_points() {
            let a = predict_at(&d1, &scheme, x, &cfg);
            let b = predict_at(&d3, &scheme, x, &cfg);
            assert!((b + 3.0 * a).abs() <= 1e-12 * (1.0 + a.abs()));
            assert_eq!(predict_at(&d0, &scheme, x, &cfg), 0.0);
        }
    }

    #[test]
    fn compare_metrics() {
        let (descs, scheme) = crt_setup(1.0);
        let mut profile = AliasProfile::new(Vec2::new(5.0, 7.0), Vec2::new(5.0, 7.0).normalized(), &symmetric_samples(3.0, 0.25));
        predict_profile(&mut profile, &descs, &scheme, &PsiEvalConfig::default());
        for s in &mut profile.samples {
            s.recon_scaled = s.predicted;
        }
        let m = compare(&profile).unwrap();
        assert_eq!(m.sup_mismatch, 0.0);
        assert!(m.peak_to_peak > 0.0);
        for s in &mut profile.samples {
            s.recon_scaled = s.predicted + 0.125;
        }
        assert!((compare(&profile).unwrap().sup_mismatch - 0.125).abs() < 1e-15);

        let (flat, _) = crt_setup(0.0);
        predict_profile(&mut profile, &flat, &scheme, &PsiEvalConfig::default());
        assert!(matches!(compare(&profile), Err(Error::DegenerateProfile)));
    }
}
