//! Analytic sinograms of disk phantoms and the semi-discrete data
//! `f̂_ε(α_k, p) = ∫ w_ε(p - s) f̂(α_k, s) ds`.

use std::f64::consts::TAU;
use std::sync::Arc;

use crate::geometry::{DiskPhantom, RadonFamily, SamplingScheme, Vec2};
use crate::quadrature::GaussRule;
use crate::special::{mollifier, mollifier_deriv};

/// Chord length of the line `α⃗·x = p` through the disk, times the amplitude.
pub fn sinogram_line_disk(phantom: &DiskPhantom, alpha: f64, p: f64) -> f64 {
    let d = p - Vec2::from_angle(alpha).dot(phantom.center);
    let r = phantom.radius;
    if d.abs() >= r {
        return 0.0;
    }
    // (r - d)(r + d) keeps full relative precision near the tangency
    phantom.amplitude * 2.0 * ((r - d) * (r + d)).sqrt()
}

/// Arc length of the circle `|x - Rα⃗| = ρ` inside the disk, times the
/// amplitude.
pub fn sinogram_circle_disk(phantom: &DiskPhantom, acquisition_radius: f64, alpha: f64, rho: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    let d = (Vec2::from_angle(alpha) * acquisition_radius - phantom.center).norm();
    let r = phantom.radius;
    if d >= r + rho || rho >= d + r {
        return 0.0;
    }
    if rho + d <= r {
        return phantom.amplitude * TAU * rho;
    }
    // Half-angle θ/2 of the arc inside the disk: sin²(θ/2) = (r² - (d-ρ)²)/(4dρ).
    // Same angle as arccos((d² + ρ² - r²)/(2dρ)), without the loss of
    // precision next to the tangencies.
    let s2 = ((r - d + rho) * (r + d - rho) / (4.0 * d * rho)).clamp(0.0, 1.0);
    phantom.amplitude * 2.0 * rho * 2.0 * s2.sqrt().asin()
}

/// `f̂(α, p)` of a disk phantom for one curve family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinogramSampler {
    pub family: RadonFamily,
    pub phantom: DiskPhantom,
}

impl SinogramSampler {
    pub fn new(family: RadonFamily, phantom: DiskPhantom) -> Self {
        SinogramSampler { family, phantom }
    }

    #[inline]
    pub fn value(&self, alpha: f64, p: f64) -> f64 {
        match self.family {
            RadonFamily::Line => sinogram_line_disk(&self.phantom, alpha, p),
            RadonFamily::Circle { radius } => sinogram_circle_disk(&self.phantom, radius, alpha, p),
        }
    }

    /// Interval outside which `f̂(α, ·)` vanishes.
    pub fn support(&self, alpha: f64) -> (f64, f64) {
        let r = self.phantom.radius;
        match self.family {
            RadonFamily::Line => {
                let c = Vec2::from_angle(alpha).dot(self.phantom.center);
                (c - r, c + r)
            }
            RadonFamily::Circle { radius } => {
                let d = (Vec2::from_angle(alpha) * radius - self.phantom.center).norm();
                ((d - r).max(0.0), d + r)
            }
        }
    }

    /// Offsets where `f̂(α, ·)` has a square-root kink (curve tangent to
    /// the boundary).
    pub fn kinks(&self, alpha: f64) -> [f64; 2] {
        let r = self.phantom.radius;
        match self.family {
            RadonFamily::Line => {
                let c = Vec2::from_angle(alpha).dot(self.phantom.center);
                [c - r, c + r]
            }
            RadonFamily::Circle { radius } => {
                let d = (Vec2::from_angle(alpha) * radius - self.phantom.center).norm();
                [(d - r).abs(), d + r]
            }
        }
    }
}

/// Semi-discrete data: the sinogram at the grid views, smoothed in `p` by
/// `w_ε(t) = ε⁻¹ w(t/ε)`.
#[derive(Debug, Clone)]
pub struct SemiDiscreteData {
    pub scheme: SamplingScheme,
    pub sampler: SinogramSampler,
    rule: Arc<GaussRule>,
}

impl SemiDiscreteData {
    pub fn new(scheme: SamplingScheme, sampler: SinogramSampler, quad_order: usize) -> Self {
        SemiDiscreteData {
            scheme,
            sampler,
            rule: GaussRule::legendre(quad_order),
        }
    }

    pub fn quad_order(&self) -> usize {
        self.rule.order()
    }

    /// Support of `f̂_ε(α, ·)`: the sinogram support widened by `ε`.
    pub fn support(&self, alpha: f64) -> (f64, f64) {
        let (lo, hi) = self.sampler.support(alpha);
        (lo - self.scheme.eps, hi + self.scheme.eps)
    }

    /// `f̂_ε(α_k, p)`.
    pub fn data_smooth(&self, k: i64, p: f64) -> f64 {
        self.smooth_at(self.scheme.angle(k), p)
    }

    /// `∂_p f̂_ε(α_k, p)`.
    pub fn data_smooth_deriv(&self, k: i64, p: f64) -> f64 {
        self.smooth_deriv_at(self.scheme.angle(k), p)
    }

    pub fn smooth_at(&self, alpha: f64, p: f64) -> f64 {
        let eps = self.scheme.eps;
        self.convolve(alpha, p, mollifier) / eps
    }

    pub fn smooth_deriv_at(&self, alpha: f64, p: f64) -> f64 {
        let eps = self.scheme.eps;
        self.convolve(alpha, p, mollifier_deriv) / (eps * eps)
    }

    /// `∫ kernel((p - s)/ε) f̂(α, s) ds` over `|p - s| ≤ ε`, split at the
    /// kinks of `f̂`. Pieces touching a kink use `s = kink ± v²`, which
    /// turns the square-root behaviour into a smooth integrand.
    fn convolve(&self, alpha: f64, p: f64, kernel: impl Fn(f64) -> f64) -> f64 {
        let eps = self.scheme.eps;
        let (supp_lo, supp_hi) = self.sampler.support(alpha);
        let lo = (p - eps).max(supp_lo);
        let hi = (p + eps).min(supp_hi);
        if lo >= hi {
            return 0.0;
        }
        let kinks = self.sampler.kinks(alpha);
        let mut cuts = [lo, 0.0, 0.0, hi];
        let mut n = 1;
        for &c in &kinks {
            if c > lo && c < hi {
                cuts[n] = c;
                n += 1;
            }
        }
        cuts[n] = hi;
        let cuts = &mut cuts[..=n];
        cuts.sort_by(f64::total_cmp);

        let is_kink = |s: f64| kinks.contains(&s);
        let f = |s: f64| kernel((p - s) / eps) * self.sampler.value(alpha, s);
        let rule = &self.rule;
        let mut total = 0.0;
        for pair in cuts.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b <= a {
                continue;
            }
            total += match (is_kink(a), is_kink(b)) {
                (false, false) => rule.integrate(a, b, &f),
                (true, false) => from_left(rule, a, b, &f),
                (false, true) => from_right(rule, a, b, &f),
                (true, true) => {
                    let m = 0.5 * (a + b);
                    from_left(rule, a, m, &f) + from_right(rule, m, b, &f)
                }
            };
        }
        total
    }
}

/// `∫_a^b f`, with `s = a + v²`.
fn from_left(rule: &GaussRule, a: f64, b: f64, f: &impl Fn(f64) -> f64) -> f64 {
    rule.integrate(0.0, (b - a).sqrt(), |v| 2.0 * v * f(a + v * v))
}

/// `∫_a^b f`, with `s = b - v²`.
fn from_right(rule: &GaussRule, a: f64, b: f64, f: &impl Fn(f64) -> f64) -> f64 {
    rule.integrate(0.0, (b - a).sqrt(), |v| 2.0 * v * f(b - v * v))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::geometry::AngularWindow;
    use crate::quadrature::adaptive;

    fn disk() -> DiskPhantom {
        DiskPhantom::new(Vec2::new(0.0, 0.0), 5.0, 1.0).unwrap()
    }

    #[test]
    fn line_chords() {
        let d = disk();
        assert_eq!(sinogram_line_disk(&d, 0.3, 0.0), 10.0);
        assert_eq!(sinogram_line_disk(&d, 1.0, 5.0), 0.0);
        assert_eq!(sinogram_line_disk(&d, 1.0, -5.0), 0.0);
        assert_eq!(sinogram_line_disk(&d, 2.0, 3.0), 8.0);
    }

    #[test]
    fn line_symmetry() {
        let d = DiskPhantom::new(Vec2::new(0.7, -1.2), 2.0, 1.5).unwrap();
        for &(a, p) in &[(0.1, 0.3), (1.3, -1.1), (2.9, 0.0), (-0.8, 1.7)] {
            let lhs = sinogram_line_disk(&d, a, p);
            let rhs = sinogram_line_disk(&d, a + PI, -p);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_arcs() {
        let d = DiskPhantom::new(Vec2::new(5.0, 0.0), 2.0, 1.0).unwrap();
        // source at (5,0): concentric circles of radius < r are fully inside
        assert!((sinogram_circle_disk(&d, 5.0, 0.0, 1.5) - TAU * 1.5).abs() < 1e-12);
        // external tangency d = r + ρ
        let far = DiskPhantom::new(Vec2::new(0.0, 0.0), 2.0, 1.0).unwrap();
        assert_eq!(sinogram_circle_disk(&far, 5.0, 0.0, 3.0), 0.0);
        assert_eq!(sinogram_circle_disk(&far, 5.0, 0.0, 7.0), 0.0);
    }

    fn arc_oracle(phantom: &DiskPhantom, z: Vec2, rho: f64) -> f64 {
        // ρ ∫ χ(z + ρ(cos t, sin t)) dt, integrating the indicator
        // piecewise between its sign changes on a fine scan
        let n = 20_000;
        let inside = |t: f64| (z + Vec2::from_angle(t) * rho - phantom.center).norm() < phantom.radius;
        let mut total = 0.0;
        let mut t0 = 0.0;
        let mut state = inside(0.0);
        for i in 1..=n {
            let t = TAU * i as f64 / n as f64;
            let s = inside(t);
            if s != state || i == n {
                let (mut a, mut b) = (TAU * (i - 1) as f64 / n as f64, t);
                if s != state {
                    for _ in 0..60 {
                        let m = 0.5 * (a + b);
                        if inside(m) == state {
                            a = m;
                        } else {
                            b = m;
                        }
                    }
                } else {
                    a = t;
                }
                if state {
                    total += a - t0;
                }
                t0 = a;
                state = s;
            }
        }
        phantom.amplitude * rho * total
    }

    #[test]
    fn circle_arc_matches_angular_oracle() {
        let phantom = DiskPhantom::new(Vec2::new(1.0, 1.0), 2.0, 1.0).unwrap();
        let alpha = 0.53 * PI;
        let z = Vec2::from_angle(alpha) * 5.0;
        let rho = (z - phantom.center).norm() - 2.0 + 0.5;
        let v = sinogram_circle_disk(&phantom, 5.0, alpha, rho);
        assert!(v > 0.0);
        assert!((v - arc_oracle(&phantom, z, rho)).abs() < 1e-8);
    }

    fn crt_data(eps: f64) -> SemiDiscreteData {
        SemiDiscreteData::new(
            SamplingScheme::line_half_turn(eps, 200, 0.0),
            SinogramSampler::new(RadonFamily::Line, disk()),
            32,
        )
    }

    #[test]
    fn smoothing_outside_support_is_zero() {
        let data = crt_data(0.02);
        assert_eq!(data.smooth_at(0.0, 5.03), 0.0);
        assert_eq!(data.smooth_deriv_at(0.0, -5.03), 0.0);
    }

    #[test]
    fn smoothing_constant_and_linear() {
        // On a huge disk the chord is constant across [p - ε, p + ε] up to
        // s²/r, so ∫w = 1 returns it unchanged.
        let huge = DiskPhantom::new(Vec2::new(0.0, 0.0), 1.0e6, 1.0).unwrap();
        let data = SemiDiscreteData::new(
            SamplingScheme::line_half_turn(0.02, 200, 0.0),
            SinogramSampler::new(RadonFamily::Line, huge),
            32,
        );
        assert!((data.smooth_at(0.4, 0.0) / 2.0e6 - 1.0).abs() < 1e-12);

        let data = crt_data(0.02);
        // even profile: zero slope at its centre
        assert!(data.smooth_deriv_at(0.4, 0.0).abs() < 1e-12);
        // locally linear to O(ε²): slope reproduced
        let slope = data.smooth_deriv_at(0.4, 3.0);
        let exact = -2.0 * 3.0 / (25.0f64 - 9.0).sqrt();
        assert!((slope - exact).abs() < 1e-4, "{slope} vs {exact}");
    }

    #[test]
    fn smoothing_matches_adaptive_oracle_near_tangency() {
        let data = crt_data(0.02);
        let p = 4.99;
        let eps = 0.02;
        let oracle = adaptive(p - eps, p + eps, 1e-13, 20_000, |s| {
            mollifier((p - s) / eps) / eps * sinogram_line_disk(&disk(), 0.0, s)
        })
        .unwrap();
        assert!((data.smooth_at(0.0, p) - oracle).abs() < 1e-9);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let data = crt_data(0.02);
        let eps = 0.02;
        for &p in &[4.985, 4.999, 3.0, -4.99] {
            let h = 1e-6 * eps;
            let fd = (data.smooth_at(0.0, p + h) - data.smooth_at(0.0, p - h)) / (2.0 * h);
            let d = data.smooth_deriv_at(0.0, p);
            assert!((fd - d).abs() <= 1e-5 * d.abs().max(1.0), "p={p}: {fd} vs {d}");
        }
    }

    #[test]
    fn circle_smoothing_matches_oracle() {
        let phantom = DiskPhantom::new(Vec2::new(1.0, 1.0), 2.0, 1.0).unwrap();
        let family = RadonFamily::Circle { radius: 5.0 };
        let window = AngularWindow::centered(0.53 * PI, 0.25 * PI);
        let data = SemiDiscreteData::new(
            SamplingScheme::circle_limited(0.01, 500, window),
            SinogramSampler::new(family, phantom),
            32,
        );
        let alpha = 0.53 * PI;
        let kink = data.sampler.kinks(alpha)[0];
        for &p in &[kink - 0.005, kink + 0.003, kink + 1.0] {
            let eps = 0.01;
            let oracle = adaptive(p - eps, p + eps, 1e-13, 20_000, |s| {
                mollifier_deriv((p - s) / eps) / (eps * eps) * data.sampler.value(alpha, s)
            })
            .unwrap();
            assert!((data.smooth_deriv_at(alpha, p) - oracle).abs() < 1e-8);
        }
    }
}
