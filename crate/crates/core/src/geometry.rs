//! Radon curve families, disk phantoms, angular sampling, and the
//! parameters of each tangency between an integration curve through a
//! probe point and the phantom boundary.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// `(cos α, sin α)`.
    #[inline]
    pub fn from_angle(alpha: f64) -> Self {
        let (s, c) = alpha.sin_cos();
        Vec2 { x: c, y: s }
    }

    /// Counter-clockwise rotation by π/2.
    #[inline]
    pub fn perp(self) -> Self {
        Vec2 {
            x: -self.y,
            y: self.x,
        }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Self {
        self * (1.0 / self.norm())
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(v: [f64; 2]) -> Self {
        Vec2 { x: v[0], y: v[1] }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Which of the two tangent offsets `P(α)` of a disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Line: `α⃗·a - r`. Circle: `|Rα⃗ - a| - r` (external tangency).
    Minus,
    /// Line: `α⃗·a + r`. Circle: `|Rα⃗ - a| + r` (circle encloses the disk).
    Plus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Minus => -1.0,
            Branch::Plus => 1.0,
        }
    }
}

/// Curve family of the generalized Radon transform, given by its defining
/// function `Φ(α, x)`. Both integration and backprojection weights are 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RadonFamily {
    /// Lines `α⃗·x = p`.
    Line,
    /// Circles `|x - Rα⃗| = p` centred on the acquisition circle of radius `R`.
    Circle { radius: f64 },
}

impl RadonFamily {
    /// `W(α, p; x)`.
    pub fn integration_weight(&self) -> f64 {
        1.0
    }

    /// `ω(α, x)`.
    pub fn backprojection_weight(&self) -> f64 {
        1.0
    }

    /// Angular spacing for `n` views covering the family's natural range:
    /// a half turn for lines, a full turn for circles.
    pub fn angular_step(&self, n_alpha: usize) -> f64 {
        match self {
            RadonFamily::Line => PI / n_alpha as f64,
            RadonFamily::Circle { .. } => TAU / n_alpha as f64,
        }
    }

    /// The defining function `Φ(α, x)`.
    pub fn phi(&self, alpha: f64, x: Vec2) -> Result<f64> {
        let v = self.phi_unchecked(alpha, x);
        if let RadonFamily::Circle { .. } = self {
            if v == 0.0 {
                return Err(Error::DegeneratePoint {
                    x: x.x,
                    y: x.y,
                    alpha,
                });
            }
        }
        Ok(v)
    }

    #[inline]
    pub(crate) fn phi_unchecked(&self, alpha: f64, x: Vec2) -> f64 {
        self.phi_along(Vec2::from_angle(alpha), x)
    }

    /// `Φ` with the view direction `α⃗` already evaluated.
    #[inline]
    pub(crate) fn phi_along(&self, dir: Vec2, x: Vec2) -> f64 {
        match *self {
            RadonFamily::Line => dir.dot(x),
            RadonFamily::Circle { radius } => (x - dir * radius).norm(),
        }
    }

    /// `∇ₓΦ(α, x)`; unit length for both families.
    pub fn grad_x(&self, alpha: f64, x: Vec2) -> Result<Vec2> {
        match *self {
            RadonFamily::Line => Ok(Vec2::from_angle(alpha)),
            RadonFamily::Circle { radius } => {
                let d = x - Vec2::from_angle(alpha) * radius;
                let n = d.norm();
                if n == 0.0 {
                    return Err(Error::DegeneratePoint {
                        x: x.x,
                        y: x.y,
                        alpha,
                    });
                }
                Ok(d * (1.0 / n))
            }
        }
    }

    /// Offset `P(α)` of the curve of view `α` tangent to the phantom boundary.
    pub fn tangent_p(&self, phantom: &DiskPhantom, alpha: f64, branch: Branch) -> Result<f64> {
        match *self {
            RadonFamily::Line => {
                Ok(Vec2::from_angle(alpha).dot(phantom.center) + branch.sign() * phantom.radius)
            }
            RadonFamily::Circle { radius } => {
                let d = (Vec2::from_angle(alpha) * radius - phantom.center).norm();
                if d <= phantom.radius {
                    return Err(Error::SourceInsidePhantom { alpha });
                }
                Ok(d + branch.sign() * phantom.radius)
            }
        }
    }

    /// Range of `Φ(α, ·)` over the axis-aligned box `[lo, hi]`.
    pub fn phi_bounds(&self, alpha: f64, lo: Vec2, hi: Vec2) -> (f64, f64) {
        let corners = [lo, Vec2::new(hi.x, lo.y), hi, Vec2::new(lo.x, hi.y)];
        let extreme = |f: &dyn Fn(Vec2) -> f64| {
            corners
                .iter()
                .map(|&c| f(c))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
        };
        match *self {
            RadonFamily::Line => {
                let dir = Vec2::from_angle(alpha);
                extreme(&|c| dir.dot(c))
            }
            RadonFamily::Circle { radius } => {
                let z = Vec2::from_angle(alpha) * radius;
                let (_, max) = extreme(&|c| (c - z).norm());
                let nearest = Vec2::new(z.x.clamp(lo.x, hi.x), z.y.clamp(lo.y, hi.y));
                ((nearest - z).norm(), max)
            }
        }
    }

    /// `∂_α(Φ(α, x₀) - P(α))` at `α` by a central difference with step
    /// 1e-6 rad and one Richardson extrapolation, in the natural (unflipped)
    /// orientation.
    pub fn mu0_numeric(&self, phantom: &DiskPhantom, x0: Vec2, alpha: f64, branch: Branch) -> Result<f64> {
        let g = |a: f64| -> Result<f64> { Ok(self.phi(a, x0)? - self.tangent_p(phantom, a, branch)?) };
        let step = 1e-6;
        let central = |h: f64| -> Result<f64> { Ok((g(alpha + h)? - g(alpha - h)?) / (2.0 * h)) };
        let coarse = central(step)?;
        let fine = central(0.5 * step)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }
}

/// Piecewise-constant disk: `amplitude` inside `|x - center| < radius`, 0 outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskPhantom {
    pub center: Vec2,
    pub radius: f64,
    /// Inside value minus outside value.
    pub amplitude: f64,
}

impl DiskPhantom {
    pub fn new(center: Vec2, radius: f64, amplitude: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::config("phantom.radius", format!("must be positive, got {radius}")));
        }
        Ok(DiskPhantom {
            center,
            radius,
            amplitude,
        })
    }

    pub fn value_at(&self, x: Vec2) -> f64 {
        if (x - self.center).norm() < self.radius {
            self.amplitude
        } else {
            0.0
        }
    }
}

/// Closed angular interval `[lo, hi]` of view angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct AngularWindow {
    pub lo: f64,
    pub hi: f64,
}

impl From<[f64; 2]> for AngularWindow {
    fn from(v: [f64; 2]) -> Self {
        AngularWindow { lo: v[0], hi: v[1] }
    }
}

impl From<AngularWindow> for [f64; 2] {
    fn from(w: AngularWindow) -> Self {
        [w.lo, w.hi]
    }
}

impl AngularWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::config("scheme.window", format!("empty window [{lo}, {hi}]")));
        }
        Ok(AngularWindow { lo, hi })
    }

    pub fn full_circle() -> Self {
        AngularWindow { lo: -PI, hi: PI }
    }

    pub fn half_circle() -> Self {
        AngularWindow {
            lo: -0.5 * PI,
            hi: 0.5 * PI,
        }
    }

    pub fn centered(center: f64, half_width: f64) -> Self {
        AngularWindow {
            lo: center - half_width,
            hi: center + half_width,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Whether the angle, taken modulo `period`, falls in the window.
    pub fn contains_mod(&self, alpha: f64, period: f64) -> bool {
        let shifted = self.lo + (alpha - self.lo).rem_euclid(period);
        shifted <= self.hi
    }

    /// Whether the view `alpha` of `family` is covered. Lines are
    /// unoriented, so `α` and `α + π` describe the same line set.
    pub fn covers(&self, family: &RadonFamily, alpha: f64) -> bool {
        match family {
            RadonFamily::Line => self.contains_mod(alpha, PI),
            RadonFamily::Circle { .. } => self.contains_mod(alpha, TAU),
        }
    }
}

/// Angular grid `α_k = origin + Δα (k + shift)` with `Δα = κ ε`, restricted
/// to a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingScheme {
    /// Mollifier width in `p`.
    pub eps: f64,
    pub delta_alpha: f64,
    pub n_alpha: usize,
    pub origin: f64,
    pub shift: f64,
    pub window: AngularWindow,
}

impl SamplingScheme {
    /// Half-turn line grid `α_k = -π/2 + (π/N)(k + δ)` over `|α| ≤ π/2`.
    pub fn line_half_turn(eps: f64, n_alpha: usize, shift: f64) -> Self {
        SamplingScheme {
            eps,
            delta_alpha: PI / n_alpha as f64,
            n_alpha,
            origin: -0.5 * PI,
            shift,
            window: AngularWindow::half_circle(),
        }
    }

    /// Full-turn circle grid `α_k = (2π/N) k` restricted to `window`.
    pub fn circle_limited(eps: f64, n_alpha: usize, window: AngularWindow) -> Self {
        SamplingScheme {
            eps,
            delta_alpha: TAU / n_alpha as f64,
            n_alpha,
            origin: 0.0,
            shift: 0.0,
            window,
        }
    }

    /// `κ = Δα / ε`.
    pub fn kappa(&self) -> f64 {
        self.delta_alpha / self.eps
    }

    pub fn angle(&self, k: i64) -> f64 {
        self.origin + self.delta_alpha * (k as f64 + self.shift)
    }

    /// Real index `k⋆` with `α_{k⋆} = α`.
    pub fn fractional_index(&self, alpha: f64) -> f64 {
        (alpha - self.origin) / self.delta_alpha - self.shift
    }

    /// Indices of grid views in the half-open window `[lo, hi)`, in
    /// increasing order. Edges are matched up to rounding, so a window
    /// whose ends are grid angles holds exactly `width / Δα` views. For
    /// lines, a window spanning more than a half turn keeps only the first
    /// representative of each line.
    pub fn view_indices(&self, family: &RadonFamily) -> Vec<i64> {
        let first = ((self.window.lo - self.origin) / self.delta_alpha - self.shift).ceil() as i64;
        let last = ((self.window.hi - self.origin) / self.delta_alpha - self.shift).floor() as i64;
        let tol = 1e-9 * self.delta_alpha;
        let mut out = Vec::new();
        for k in (first - 1)..=(last + 1) {
            let a = self.angle(k);
            if a < self.window.lo - tol || a >= self.window.hi - tol {
                continue;
            }
            if let RadonFamily::Line = family {
                if a >= self.window.lo + PI - 1e-12 {
                    continue;
                }
            }
            out.push(k);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::config("scheme.eps", "must be positive"));
        }
        if self.n_alpha < 2 {
            return Err(Error::config("scheme.n_alpha", "must be at least 2"));
        }
        if !(self.delta_alpha > 0.0) {
            return Err(Error::config("scheme.delta_alpha", "must be positive"));
        }
        if !(self.window.hi > self.window.lo) {
            return Err(Error::config(
                "scheme.window",
                format!("empty window [{}, {}]", self.window.lo, self.window.hi),
            ));
        }
        Ok(())
    }
}

/// Parameters of one tangency `(α⋆, p⋆)` between the integration curve
/// through `x₀` and the phantom boundary at `y₀`.
///
/// Orientation-dependent quantities (`u0`, `mu0`, `m`) are stored after
/// the p-axis flip when the natural orientation had `M < 0`; `p_star`
/// stays in natural coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangencyDescriptor {
    pub alpha_star: f64,
    pub p_star: f64,
    pub branch: Branch,
    pub y0: Vec2,
    /// Unit normal of the boundary at `y₀`, pointing into the disk.
    pub theta0: Vec2,
    /// Curvature difference; always positive.
    pub m: f64,
    pub u0: Vec2,
    pub mu0: f64,
    pub k_star: f64,
    /// Prefactor `c = -(κωW/π) (2/M)^{1/2} Δf`.
    pub amplitude: f64,
    pub flipped: bool,
}

impl TangencyDescriptor {
    /// `+1`, or `-1` when the p-axis was flipped.
    pub fn orientation(&self) -> f64 {
        if self.flipped {
            -1.0
        } else {
            1.0
        }
    }
}

/// `μ₀` from its closed form: lines `α⃗⋆⊥·(x₀ - y₀)`; circles
/// `-R α⃗⋆⊥·(u₀ - Θ₀) = -(R/ρ⋆) α⃗⋆⊥·(x₀ - y₀)`, with the orientation
/// sign applied.
pub fn mu0_closed_form(desc: &TangencyDescriptor, family: &RadonFamily, x0: Vec2) -> f64 {
    let perp = Vec2::from_angle(desc.alpha_star).perp();
    let natural = match *family {
        RadonFamily::Line => perp.dot(x0 - desc.y0),
        RadonFamily::Circle { radius } => -(radius / desc.p_star) * perp.dot(x0 - desc.y0),
    };
    desc.orientation() * natural
}

fn wrap_angle(a: f64) -> f64 {
    // into (-π, π]
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// All tangencies of integration curves through `x0` with the phantom
/// boundary, for view angles inside `window`.
///
/// Lines are enumerated on the `Minus` branch only: `(α, P₊(α))` is the
/// same line as `(α + π, P₋(α + π))`, and the `Minus` representative
/// already has `M > 0`. An interior `x0` has no tangent line and yields an
/// empty list.
pub fn tangency_enumerate(
    family: &RadonFamily,
    phantom: &DiskPhantom,
    x0: Vec2,
    window: &AngularWindow,
    scheme: &SamplingScheme,
) -> Result<Vec<TangencyDescriptor>> {
    let dist = (x0 - phantom.center).norm();
    if (dist - phantom.radius).abs() <= 1e-12 * phantom.radius.max(1.0) {
        return Err(Error::PointOnBoundary);
    }
    let mut out = Vec::new();
    match *family {
        RadonFamily::Line => {
            if dist < phantom.radius {
                return Ok(out);
            }
            let d = x0 - phantom.center;
            let beta = d.y.atan2(d.x);
            let gamma = (phantom.radius / dist).acos();
            for s in [-1.0, 1.0] {
                let alpha = wrap_angle(beta + PI + s * gamma);
                if window.covers(family, alpha) {
                    out.push(build_descriptor(family, phantom, x0, alpha, Branch::Minus, scheme)?);
                }
            }
        }
        RadonFamily::Circle { .. } => {
            for branch in [Branch::Minus, Branch::Plus] {
                for alpha in circle_roots(family, phantom, x0, window, branch)? {
                    out.push(build_descriptor(family, phantom, x0, alpha, branch, scheme)?);
                }
            }
        }
    }
    out.sort_by(|a, b| a.alpha_star.total_cmp(&b.alpha_star));
    Ok(out)
}

/// Roots of `Φ(α, x₀) - P(α)` on the window: a sign-change scan followed
/// by bisection to machine precision.
fn circle_roots(
    family: &RadonFamily,
    phantom: &DiskPhantom,
    x0: Vec2,
    window: &AngularWindow,
    branch: Branch,
) -> Result<Vec<f64>> {
    const SCAN: usize = 8192;
    let g = |a: f64| -> Result<f64> { Ok(family.phi(a, x0)? - family.tangent_p(phantom, a, branch)?) };
    let step = window.width() / SCAN as f64;
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_a = window.lo;
    let mut prev = g(prev_a)?;
    if prev == 0.0 {
        roots.push(prev_a);
    }
    for i in 1..=SCAN {
        let a = window.lo + step * i as f64;
        let v = g(a)?;
        if v == 0.0 {
            roots.push(a);
        } else if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
            let (mut lo, mut hi, mut glo) = (prev_a, a, prev);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let gm = g(mid)?;
                if (gm > 0.0) == (glo > 0.0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_a = a;
        prev = v;
    }
    Ok(roots)
}

fn build_descriptor(
    family: &RadonFamily,
    phantom: &DiskPhantom,
    x0: Vec2,
    alpha: f64,
    branch: Branch,
    scheme: &SamplingScheme,
) -> Result<TangencyDescriptor> {
    let dir = Vec2::from_angle(alpha);
    let r = phantom.radius;
    let p_star = family.tangent_p(phantom, alpha, branch)?;
    let (y0, theta0, m_natural) = match *family {
        RadonFamily::Line => {
            // Normal α⃗ points into the disk on the Minus branch.
            let inward = -dir * branch.sign();
            let y0 = phantom.center - inward * r;
            let m = -branch.sign() / r;
            (y0, inward, m)
        }
        RadonFamily::Circle { radius } => {
            let z = dir * radius;
            let toward_center = (phantom.center - z).normalized();
            let y0 = z + toward_center * p_star;
            let (inward, m) = match branch {
                Branch::Minus => (toward_center, 1.0 / r + 1.0 / p_star),
                Branch::Plus => (-toward_center, 1.0 / p_star - 1.0 / r),
            };
            (y0, inward, m)
        }
    };
    if m_natural.abs() < 1e-12 * (1.0 / r) {
        return Err(Error::HigherOrderContact { alpha, m: m_natural });
    }
    let flipped = m_natural < 0.0;
    let sign = if flipped { -1.0 } else { 1.0 };
    let m = m_natural.abs();
    let u0 = family.grad_x(alpha, x0)? * sign;
    let kappa = scheme.kappa();
    let amplitude = -(kappa * family.backprojection_weight() * family.integration_weight() / PI)
        * (2.0 / m).sqrt()
        * phantom.amplitude;
    let mut desc = TangencyDescriptor {
        alpha_star: alpha,
        p_star,
        branch,
        y0,
        theta0,
        m,
        u0,
        mu0: 0.0,
        k_star: scheme.fractional_index(alpha),
        amplitude,
        flipped,
    };
    desc.mu0 = mu0_closed_form(&desc, family, x0);
    Ok(desc)
}
