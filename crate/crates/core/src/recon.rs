//! Discretized filtered backprojection.
//!
//! Each view's `g_k(p) = ∂_p f̂_ε(α_k, p)` is tabulated on a uniform grid
//! of step `ε/η` and filtered with the principal-value Hilbert integral
//! `F_k(q) = PV ∫ g_k(p) / (p - q) dp`. The reconstruction is
//! `f_rec(x) = -(Δα / 2π²) Σ_k ω(α_k, x) F_k(Φ(α_k, x))`.
//!
//! The PV integral is taken exactly for the piecewise-linear interpolant of
//! the samples (product integration against hat functions). On a uniform
//! grid that is a discrete convolution with a fixed kernel, done by FFT.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{RadonFamily, SamplingScheme, Vec2};
use crate::sinogram::SemiDiscreteData;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconConfig {
    /// Oversampling of the filter grid: step `ε / eta`.
    pub eta: usize,
    /// Filtering interval is the data support widened by `margin · ε`.
    pub margin: f64,
}

impl Default for ReconConfig {
    fn default() -> Self {
        ReconConfig { eta: 16, margin: 6.0 }
    }
}

impl ReconConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eta == 0 {
            return Err(Error::config("recon.eta", "must be at least 1"));
        }
        if !(self.margin >= 4.0) {
            return Err(Error::config("recon.margin", "must be at least 4 (units of eps)"));
        }
        Ok(())
    }
}

/// Axis-aligned box containing every point that will be reconstructed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lo: Vec2,
    pub hi: Vec2,
}

impl Region {
    pub fn around(center: Vec2, half_width: f64) -> Self {
        let d = Vec2::new(half_width, half_width);
        Region {
            lo: center - d,
            hi: center + d,
        }
    }

    pub fn union(self, o: Region) -> Region {
        Region {
            lo: Vec2::new(self.lo.x.min(o.lo.x), self.lo.y.min(o.lo.y)),
            hi: Vec2::new(self.hi.x.max(o.hi.x), self.hi.y.max(o.hi.y)),
        }
    }

    pub fn including(self, p: Vec2) -> Region {
        self.union(Region { lo: p, hi: p })
    }
}

/// PV Hilbert filter for sequences of one fixed length.
pub struct PvFilter {
    len: usize,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kernel_spectrum: Vec<Complex64>,
}

impl PvFilter {
    pub fn new(len: usize) -> Self {
        assert!(len >= 4, "filter grid needs at least 4 samples");
        let fft_len = (2 * len).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        // F_j = Σ_i g_i K(i - j) = Σ_i g_i k(j - i) with k(m) = -K(m)
        let mut kernel = vec![Complex64::new(0.0, 0.0); fft_len];
        for m in 1..len {
            let v = hat_weight(m);
            kernel[m] = Complex64::new(-v, 0.0);
            kernel[fft_len - m] = Complex64::new(v, 0.0);
        }
        forward.process(&mut kernel);
        PvFilter {
            len,
            fft_len,
            forward,
            inverse,
            kernel_spectrum: kernel,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `PV ∫ g(p)/(p - q_j) dp` over the grid interval for every grid
    /// point `q_j`. `g` must vanish at both ends of the grid.
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        let n = self.len;
        assert_eq!(g.len(), n);
        let mut buf: Vec<Complex64> = g.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        buf.resize(self.fft_len, Complex64::new(0.0, 0.0));
        self.forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_spectrum) {
            *b *= k;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.fft_len as f64;
        buf[..n].iter().map(|c| c.re * scale).collect()
    }
}

/// `PV ∫ hat(s)/(s + m) ds` over [-1, 1] for the unit hat function,
/// i.e. the second difference of `x ln x` at `m ≥ 1`.
fn hat_weight(m: usize) -> f64 {
    let x = m as f64;
    if m < 12 {
        let xlnx = |v: f64| if v == 0.0 { 0.0 } else { v * v.ln() };
        return xlnx(x + 1.0) - 2.0 * xlnx(x) + xlnx(x - 1.0);
    }
    // Σ_k 2 / ((2k)(2k-1) x^(2k-1))
    let y = 1.0 / (x * x);
    (1.0 + y * (1.0 / 6.0 + y * (1.0 / 15.0 + y * (1.0 / 28.0 + y * (1.0 / 45.0 + y / 66.0))))) / x
}

/// Filtered samples of one view on a uniform `q` grid.
#[derive(Debug, Clone)]
pub struct FilteredView {
    pub k: i64,
    pub alpha: f64,
    /// `α⃗ = (cos α, sin α)`.
    pub dir: Vec2,
    pub q_start: f64,
    pub q_step: f64,
    pub values: Vec<f64>,
}

impl FilteredView {
    pub fn q_range(&self) -> (f64, f64) {
        (self.q_start, self.q_start + self.q_step * (self.values.len() - 1) as f64)
    }

    /// Cubic (four-point Lagrange) interpolation of `F_k(q)`; `None` when
    /// `q` lacks a full stencil.
    #[inline]
    pub fn eval(&self, q: f64) -> Option<f64> {
        let t = (q - self.q_start) / self.q_step;
        let j = t.floor();
        if !(j >= 1.0 && j + 2.0 < self.values.len() as f64) {
            return None;
        }
        let s = t - j;
        let j = j as usize;
        let v = &self.values[j - 1..j + 3];
        let (sm1, sm2, sp1) = (s - 1.0, s - 2.0, s + 1.0);
        let w0 = -s * sm1 * sm2 / 6.0;
        let w1 = sp1 * sm1 * sm2 / 2.0;
        let w2 = -sp1 * s * sm2 / 2.0;
        let w3 = sp1 * s * sm1 / 6.0;
        Some(w0 * v[0] + w1 * v[1] + w2 * v[2] + w3 * v[3])
    }
}

/// Grid layout `[q_start, q_start + (len-1) step]` for view `k` covering
/// both the filtering interval and the `q` values the region needs.
fn view_grid(data: &SemiDiscreteData, k: i64, cfg: &ReconConfig, region: &Region) -> (f64, f64, usize) {
    let eps = data.scheme.eps;
    let step = eps / cfg.eta as f64;
    let alpha = data.scheme.angle(k);
    let (s_lo, s_hi) = data.sampler.support(alpha);
    let (c_lo, c_hi) = data.sampler.family.phi_bounds(alpha, region.lo, region.hi);
    let lo = (s_lo - cfg.margin * eps).min(c_lo - 4.0 * step);
    let hi = (s_hi + cfg.margin * eps).max(c_hi + 4.0 * step);
    let len = ((hi - lo) / step).ceil() as usize + 1;
    (lo, step, len)
}

/// Tabulates `∂_p f̂_ε(α_k, ·)` on the grid and applies the PV filter.
pub fn filter_view(data: &SemiDiscreteData, k: i64, q_start: f64, q_step: f64, filter: &PvFilter) -> FilteredView {
    let alpha = data.scheme.angle(k);
    let (d_lo, d_hi) = data.support(alpha);
    let g: Vec<f64> = (0..filter.len())
        .map(|j| {
            let q = q_start + q_step * j as f64;
            if q <= d_lo || q >= d_hi {
                0.0
            } else {
                data.smooth_deriv_at(alpha, q)
            }
        })
        .collect();
    FilteredView {
        k,
        alpha,
        dir: Vec2::from_angle(alpha),
        q_start,
        q_step,
        values: filter.apply(&g),
    }
}

/// `-(Δα / 2π²) Σ_k ω F_k(Φ(α_k, x))`, summed in view order.
pub fn backproject(views: &[FilteredView], x: Vec2, family: &RadonFamily, scheme: &SamplingScheme) -> Result<f64> {
    let mut acc = 0.0;
    for view in views {
        let q = family.phi_along(view.dir, x);
        if q == 0.0 && matches!(family, RadonFamily::Circle { .. }) {
            return Err(Error::DegeneratePoint {
                x: x.x,
                y: x.y,
                alpha: view.alpha,
            });
        }
        let f = view.eval(q).ok_or_else(|| {
            let (lo, hi) = view.q_range();
            Error::OutsideFilterGrid {
                view: view.k,
                q,
                lo,
                hi,
            }
        })?;
        acc += family.backprojection_weight() * f;
    }
    Ok(-scheme.delta_alpha / (2.0 * PI * PI) * acc)
}

/// Filtered views of every windowed grid view, ready for backprojection
/// anywhere inside `region`.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub family: RadonFamily,
    pub scheme: SamplingScheme,
    pub views: Vec<FilteredView>,
}

impl Reconstruction {
    pub fn build(data: &SemiDiscreteData, cfg: &ReconConfig, region: Region) -> Result<Self> {
        cfg.validate()?;
        let family = data.sampler.family;
        let indices = data.scheme.view_indices(&family);
        let grids: Vec<_> = indices.iter().map(|&k| view_grid(data, k, cfg, &region)).collect();
        let len = grids.iter().map(|g| g.2).max().unwrap_or(4).max(4);
        let filter = PvFilter::new(len);
        let views = indices
            .par_iter()
            .zip(grids.par_iter())
            .map(|(&k, &(start, step, _))| filter_view(data, k, start, step, &filter))
            .collect();
        Ok(Reconstruction {
            family,
            scheme: data.scheme,
            views,
        })
    }

    pub fn value_at(&self, x: Vec2) -> Result<f64> {
        backproject(&self.views, x, &self.family, &self.scheme)
    }

    /// Reconstructs a `pixels × pixels` square image centred at `center`.
    pub fn image(&self, center: Vec2, half_width: f64, pixels: usize) -> Result<ImageGrid> {
        let pixel_size = 2.0 * half_width / pixels as f64;
        let origin = center - Vec2::new(half_width - 0.5 * pixel_size, half_width - 0.5 * pixel_size);
        let rows: Vec<Vec<f64>> = (0..pixels)
            .into_par_iter()
            .map(|j| {
                (0..pixels)
                    .map(|i| {
                        let x = origin + Vec2::new(i as f64 * pixel_size, j as f64 * pixel_size);
                        self.value_at(x)
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(ImageGrid {
            origin,
            pixel_size,
            width: pixels,
            height: pixels,
            values: rows.concat(),
        })
    }
}

/// Sampled reconstruction. Row `j` holds `y = origin.y + j·pixel_size`
/// (bottom row first); column `i` holds `x = origin.x + i·pixel_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    /// Centre of the bottom-left pixel.
    pub origin: Vec2,
    pub pixel_size: f64,
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl ImageGrid {
    pub fn point(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64 * self.pixel_size, j as f64 * self.pixel_size)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.width + i]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
    }
}

/// One probe sample: `h`, `ε^{-1/2}(f_rec(x₀ + εhΘ) - f_rec(x₀))`, and the
/// predicted value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub h: f64,
    pub recon_scaled: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AliasProfile {
    pub x0: Vec2,
    pub theta: Vec2,
    pub samples: Vec<ProfileSample>,
}

impl AliasProfile {
    pub fn new(x0: Vec2, theta: Vec2, hs: &[f64]) -> Self {
        AliasProfile {
            x0,
            theta,
            samples: hs
                .iter()
                .map(|&h| ProfileSample {
                    h,
                    recon_scaled: 0.0,
                    predicted: 0.0,
                })
                .collect(),
        }
    }

    pub fn hs(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.h)
    }
}

/// `h = -h_max, -h_max + step, …, h_max`.
pub fn symmetric_samples(h_max: f64, step: f64) -> Vec<f64> {
    let n = (h_max / step).round() as i64;
    (-n..=n).map(|i| i as f64 * step).collect()
}

/// Fills the reconstruction side of a probe profile along `x₀ + εhΘ`.
pub fn scaled_difference_profile(recon: &Reconstruction, x0: Vec2, theta: Vec2, hs: &[f64]) -> Result<AliasProfile> {
    let eps = recon.scheme.eps;
    let base = recon.value_at(x0)?;
    let scale = 1.0 / eps.sqrt();
    let mut profile = AliasProfile::new(x0, theta, hs);
    for s in &mut profile.samples {
        s.recon_scaled = if s.h == 0.0 {
            0.0
        } else {
            scale * (recon.value_at(x0 + theta * (eps * s.h))? - base)
        };
    }
    Ok(profile)
}
