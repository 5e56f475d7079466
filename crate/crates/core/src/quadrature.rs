//! Quadrature building blocks: cached Gauss–Legendre rules for the hot
//! paths and an adaptive Gauss–Kronrod integrator used by the oracles.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    /// Shared rule of the given order. Rules are built once per process.
    pub fn legendre(order: usize) -> Arc<GaussRule> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut cache = cache.lock().expect("quadrature cache poisoned");
        cache
            .entry(order)
            .or_insert_with(|| {
                let order = NonZeroUsize::new(order).expect("quadrature order must be positive");
                let rule = GaussLegendre::new(order);
                let (nodes, weights) = rule.iter().map(|(x, w)| (*x, *w)).unzip();
                Arc::new(GaussRule { nodes, weights })
            })
            .clone()
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn integrate(&self, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn kronrod15(lo: f64, hi: f64, f: &mut impl FnMut(f64) -> f64) -> (f64, f64) {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss–Kronrod integration to absolute tolerance `tol`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `tol`, giving up after `max_intervals` pieces.
pub fn adaptive(
    lo: f64,
    hi: f64,
    tol: f64,
    max_intervals: usize,
    mut f: impl FnMut(f64) -> f64,
) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    let (v, e) = kronrod15(lo, hi, &mut f);
    let mut pieces = vec![(lo, hi, v, e)];
    loop {
        let total_err: f64 = pieces.iter().map(|p| p.3).sum();
        if total_err <= tol {
            break;
        }
        if pieces.len() >= max_intervals {
            return Err(Error::QuadratureNotConverged {
                lo,
                hi,
                estimate: total_err,
            });
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
            .expect("non-empty");
        let (a, b, _, _) = pieces.swap_remove(idx);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            // Interval collapsed to machine resolution.
            return Err(Error::QuadratureNotConverged {
                lo,
                hi,
                estimate: total_err,
            });
        }
        let (v1, e1) = kronrod15(a, m, &mut f);
        let (v2, e2) = kronrod15(m, b, &mut f);
        pieces.push((a, m, v1, e1));
        pieces.push((m, b, v2, e2));
    }
    // Sum smallest contributions first.
    pieces.sort_by(|a, b| a.2.abs().total_cmp(&b.2.abs()));
    Ok(pieces.iter().map(|p| p.2).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = GaussRule::legendre(8);
        assert_eq!(rule.order(), 8);
        let v = rule.integrate(-1.0, 2.0, |x| x.powi(15));
        let exact = (2f64.powi(16) - 1.0) / 16.0;
        assert!((v - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let v = adaptive(0.0, 1.0, 1e-12, 2000, f64::sqrt).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_reports_failure() {
        let err = adaptive(0.0, 1.0, 1e-14, 4, |x| 1.0 / x.sqrt()).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }
}
