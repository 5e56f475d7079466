//! Experiment configuration, the end-to-end run, and its report.
//!
//! A config is a TOML document. A saved [`RunReport`] is accepted as a
//! config too: its `[config]` table is the echo of the run's input.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{tangency_enumerate, AngularWindow, DiskPhantom, RadonFamily, SamplingScheme, TangencyDescriptor, Vec2};
use crate::output::{self, PsiRow};
use crate::predictor::{compare, predict_profile, ComparisonMetrics};
use crate::recon::{scaled_difference_profile, symmetric_samples, AliasProfile, ImageGrid, ReconConfig, Reconstruction, Region};
use crate::sinogram::{SemiDiscreteData, SinogramSampler};
use crate::special::{big_psi, PsiEvalConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Line,
    Circle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcquisitionConfig {
    /// Radius `R` of the circle carrying the centres of the integration circles.
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomConfig {
    pub center: Vec2,
    pub radius: f64,
    /// Jump `Δf` across the boundary (value inside the disk).
    pub jump: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub eps: f64,
    pub n_alpha: usize,
    /// Grid offset `δ` in units of `Δα`.
    #[serde(default)]
    pub shift: f64,
    /// Grid origin `ᾱ` in units of π. Defaults: -1/2 for lines, 0 for circles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_pi: Option<f64>,
    /// Angular window `Ω` in units of π. Defaults: `[-1/2, 1/2]` for lines,
    /// `[-1, 1]` for circles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_pi: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaName {
    /// `Θ = x₀ / |x₀|`.
    Radial,
    /// `Θ = -u₀` of the first tangency.
    MinusU0,
}

/// Probe direction: a named rule or an explicit vector (normalized on use).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaMode {
    Named(ThetaName),
    Explicit(Vec2),
}

impl Default for ThetaMode {
    fn default() -> Self {
        ThetaMode::Named(ThetaName::Radial)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub x0: Vec2,
    #[serde(default)]
    pub theta: ThetaMode,
    /// Profile covers `h ∈ [-h_max, h_max]`.
    pub h_max: f64,
    #[serde(default = "default_h_step")]
    pub h_step: f64,
}

fn default_h_step() -> f64 {
    0.25
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconSettings {
    pub eta: usize,
    pub margin: f64,
    pub quad_order: usize,
}

impl Default for ReconSettings {
    fn default() -> Self {
        let r = ReconConfig::default();
        ReconSettings {
            eta: r.eta,
            margin: r.margin,
            quad_order: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub global_image: bool,
    pub roi_image: bool,
    /// Global image covers `|x₁|, |x₂| ≤ global_half_width`. Defaults: 10
    /// for lines, 4 for circles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global_half_width: Option<f64>,
    pub global_pixels: usize,
    /// ROI side length in units of `ε`.
    pub roi_side: f64,
    /// ROI pixels per `ε`.
    pub roi_pixels_per_eps: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            global_image: true,
            roi_image: true,
            global_half_width: None,
            global_pixels: 1000,
            roi_side: 40.0,
            roi_pixels_per_eps: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acquisition: Option<AcquisitionConfig>,
    pub phantom: PhantomConfig,
    pub scheme: SchemeConfig,
    pub probe: ProbeConfig,
    #[serde(default)]
    pub recon: ReconSettings,
    #[serde(default)]
    pub psi: PsiEvalConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

pub const CRT_PRESET: &str = include_str!("../presets/crt.toml");
pub const GRT_PRESET: &str = include_str!("../presets/grt.toml");

impl ExperimentConfig {
    /// Parses a config, or the `[config]` table of a saved report.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text)?;
        let cfg: ExperimentConfig = match table.remove("config") {
            Some(inner) => inner.try_into()?,
            None => toml::from_str(text)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn crt_preset() -> Self {
        Self::from_toml_str(CRT_PRESET).expect("shipped preset is valid")
    }

    pub fn grt_preset() -> Self {
        Self::from_toml_str(GRT_PRESET).expect("shipped preset is valid")
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, field: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be positive, got {v}")))
            }
        };
        positive(self.phantom.radius, "phantom.radius")?;
        if !self.phantom.jump.is_finite() {
            return Err(Error::config("phantom.jump", "must be finite"));
        }
        positive(self.scheme.eps, "scheme.eps")?;
        if self.scheme.n_alpha < 2 {
            return Err(Error::config("scheme.n_alpha", "must be at least 2"));
        }
        if !self.scheme.shift.is_finite() {
            return Err(Error::config("scheme.shift", "must be finite"));
        }
        if let Some([lo, hi]) = self.scheme.window_pi {
            if !(hi > lo) {
                return Err(Error::config("scheme.window_pi", format!("empty window [{lo}, {hi}]")));
            }
        }
        match (self.family, self.acquisition) {
            (FamilyKind::Line, Some(_)) => {
                return Err(Error::config("acquisition", "only used with family = \"circle\""));
            }
            (FamilyKind::Circle, None) => {
                return Err(Error::config("acquisition.radius", "required for family = \"circle\""));
            }
            (FamilyKind::Circle, Some(a)) => {
                positive(a.radius, "acquisition.radius")?;
                if self.phantom.center.norm() + self.phantom.radius >= a.radius {
                    return Err(Error::config(
                        "phantom.radius",
                        "phantom must lie strictly inside the acquisition circle",
                    ));
                }
            }
            (FamilyKind::Line, None) => {}
        }
        positive(self.probe.h_max, "probe.h_max")?;
        positive(self.probe.h_step, "probe.h_step")?;
        if let ThetaMode::Explicit(t) = self.probe.theta {
            positive(t.norm(), "probe.theta")?;
        }
        if self.recon.eta == 0 {
            return Err(Error::config("recon.eta", "must be at least 1"));
        }
        if !(self.recon.margin >= 4.0) {
            return Err(Error::config("recon.margin", "must be at least 4"));
        }
        if self.recon.quad_order < 2 {
            return Err(Error::config("recon.quad_order", "must be at least 2"));
        }
        self.psi.validate()?;
        if let Some(w) = self.outputs.global_half_width {
            positive(w, "outputs.global_half_width")?;
        }
        if self.outputs.global_pixels == 0 {
            return Err(Error::config("outputs.global_pixels", "must be positive"));
        }
        positive(self.outputs.roi_side, "outputs.roi_side")?;
        if self.outputs.roi_pixels_per_eps == 0 {
            return Err(Error::config("outputs.roi_pixels_per_eps", "must be positive"));
        }
        Ok(())
    }

    pub fn radon_family(&self) -> RadonFamily {
        match (self.family, self.acquisition) {
            (FamilyKind::Circle, Some(a)) => RadonFamily::Circle { radius: a.radius },
            _ => RadonFamily::Line,
        }
    }

    pub fn phantom(&self) -> Result<DiskPhantom> {
        DiskPhantom::new(self.phantom.center, self.phantom.radius, self.phantom.jump)
    }

    pub fn sampling_scheme(&self) -> Result<SamplingScheme> {
        let family = self.radon_family();
        let s = &self.scheme;
        let (origin, window) = match self.family {
            FamilyKind::Line => (-0.5, [-0.5, 0.5]),
            FamilyKind::Circle => (0.0, [-1.0, 1.0]),
        };
        let origin = s.origin_pi.unwrap_or(origin) * PI;
        let [lo, hi] = s.window_pi.unwrap_or(window);
        let scheme = SamplingScheme {
            eps: s.eps,
            delta_alpha: family.angular_step(s.n_alpha),
            n_alpha: s.n_alpha,
            origin,
            shift: s.shift,
            window: AngularWindow::new(lo * PI, hi * PI)?,
        };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn recon_config(&self) -> ReconConfig {
        ReconConfig {
            eta: self.recon.eta,
            margin: self.recon.margin,
        }
    }

    pub fn global_half_width(&self) -> f64 {
        self.outputs.global_half_width.unwrap_or(match self.family {
            FamilyKind::Line => 10.0,
            FamilyKind::Circle => 4.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Everything needed to audit or repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub theta: Vec2,
    pub descriptors: Vec<TangencyDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<ComparisonMetrics>,
    #[serde(default)]
    pub timings: Vec<StageTiming>,
    #[serde(default)]
    pub outputs: Vec<String>,
}

impl RunReport {
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub profile: AliasProfile,
    pub global: Option<ImageGrid>,
    pub roi: Option<ImageGrid>,
}

struct Stopwatch(Vec<StageTiming>);

impl Stopwatch {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let v = f();
        self.0.push(StageTiming {
            stage: stage.to_string(),
            seconds: t.elapsed().as_secs_f64(),
        });
        v
    }
}

/// Reconstructs, probes and predicts as described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let family = cfg.radon_family();
    let phantom = cfg.phantom()?;
    let scheme = cfg.sampling_scheme()?;
    let x0 = cfg.probe.x0;
    let mut clock = Stopwatch(Vec::new());

    let descriptors = clock.time("tangency", || tangency_enumerate(&family, &phantom, x0, &scheme.window, &scheme))?;
    let theta = match cfg.probe.theta {
        ThetaMode::Named(ThetaName::Radial) => {
            if x0.norm() == 0.0 {
                return Err(Error::config("probe.theta", "radial direction undefined at the origin"));
            }
            x0.normalized()
        }
        ThetaMode::Named(ThetaName::MinusU0) => -descriptors.first().ok_or(Error::NoTangency)?.u0,
        ThetaMode::Explicit(t) => t.normalized(),
    };

    let eps = scheme.eps;
    let reach = eps * cfg.probe.h_max;
    let roi_half = 0.5 * cfg.outputs.roi_side * eps;
    let global_half = cfg.global_half_width();
    let mut region = Region::around(x0, 0.0).including(x0 + theta * reach).including(x0 - theta * reach);
    if cfg.outputs.roi_image {
        region = region.union(Region::around(x0, roi_half));
    }
    if cfg.outputs.global_image {
        region = region.union(Region::around(Vec2::new(0.0, 0.0), global_half));
    }

    let data = SemiDiscreteData::new(scheme, SinogramSampler::new(family, phantom), cfg.recon.quad_order);
    let recon = clock.time("filter", || Reconstruction::build(&data, &cfg.recon_config(), region))?;
    let hs = symmetric_samples(cfg.probe.h_max, cfg.probe.h_step);
    let mut profile = clock.time("profile", || scaled_difference_profile(&recon, x0, theta, &hs))?;
    clock.time("predict", || predict_profile(&mut profile, &descriptors, &scheme, &cfg.psi));
    let metrics = match compare(&profile) {
        Ok(m) => Some(m),
        Err(Error::DegenerateProfile) => None,
        Err(e) => return Err(e),
    };
    let global = if cfg.outputs.global_image {
        Some(clock.time("global_image", || {
            recon.image(Vec2::new(0.0, 0.0), global_half, cfg.outputs.global_pixels)
        })?)
    } else {
        None
    };
    let roi = if cfg.outputs.roi_image {
        let pixels = (cfg.outputs.roi_side * cfg.outputs.roi_pixels_per_eps as f64).round() as usize;
        Some(clock.time("roi_image", || recon.image(x0, roi_half, pixels.max(1)))?)
    } else {
        None
    };

    let mut outputs = vec!["profile.csv".to_string()];
    if global.is_some() {
        outputs.extend(["global.pgm".to_string(), "global.txt".to_string()]);
    }
    if roi.is_some() {
        outputs.extend(["roi.pgm".to_string(), "roi.txt".to_string()]);
    }
    outputs.push("report.toml".to_string());

    Ok(RunOutcome {
        report: RunReport {
            config: cfg.clone(),
            theta,
            descriptors,
            metrics,
            timings: clock.0,
            outputs,
        },
        profile,
        global,
        roi,
    })
}

impl RunOutcome {
    pub fn profile_csv(&self) -> String {
        output::profile_csv(&self.profile)
    }

    /// Writes every artifact listed in the report into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        output::write_file(&dir.join("profile.csv"), self.profile_csv())?;
        if let Some(g) = &self.global {
            output::write_image(dir, "global", g)?;
        }
        if let Some(r) = &self.roi {
            output::write_image(dir, "roi", r)?;
        }
        output::write_file(&dir.join("report.toml"), self.report.to_toml()?)
    }
}

/// `Ψ(a h′; a, r)` for `h′` on `samples` equispaced points of [0, 1].
pub fn psi_table(a_values: &[f64], r: f64, samples: usize, cfg: &PsiEvalConfig) -> Result<Vec<PsiRow>> {
    use rayon::prelude::*;
    cfg.validate()?;
    if samples < 2 {
        return Err(Error::config("samples", "need at least 2 points"));
    }
    let points: Vec<(f64, f64)> = a_values
        .iter()
        .flat_map(|&a| (0..samples).map(move |i| (a, i as f64 / (samples - 1) as f64)))
        .collect();
    Ok(points
        .par_iter()
        .map(|&(a, h_prime)| PsiRow {
            h_prime,
            a,
            value: big_psi(a * h_prime, a, r, cfg),
        })
        .collect())
}
