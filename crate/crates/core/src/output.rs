//! File formats: profile and Ψ tables as CSV, images as 16-bit PGM with a
//! text sidecar.
//!
//! CSV files are UTF-8 with LF line endings; numbers use Rust's shortest
//! round-trip formatting so every value parses back to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::recon::{AliasProfile, ImageGrid};

pub const PROFILE_HEADER: &str = "h,recon_scaled_diff,prediction";
pub const PSI_TABLE_HEADER: &str = "h_prime,a,psi_value";

pub fn profile_csv(profile: &AliasProfile) -> String {
    let mut out = String::with_capacity(64 * (profile.samples.len() + 1));
    out.push_str(PROFILE_HEADER);
    out.push('\n');
    for s in &profile.samples {
        let _ = writeln!(out, "{},{},{}", s.h, s.recon_scaled, s.predicted);
    }
    out
}

/// One row of a Ψ table: `Ψ(a h′; a, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiRow {
    pub h_prime: f64,
    pub a: f64,
    pub value: f64,
}

pub fn psi_table_csv(rows: &[PsiRow]) -> String {
    let mut out = String::from(PSI_TABLE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.h_prime, r.a, r.value);
    }
    out
}

/// Geometry and grey-level window of a PGM image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageSidecar {
    pub format: PgmFormat,
    pub width: usize,
    pub height: usize,
    /// Centre of the bottom-left pixel; the first PGM row is the top one.
    pub origin: Vec2,
    pub pixel_size: f64,
    /// Value mapped to grey level 0.
    pub window_min: f64,
    /// Value mapped to grey level 65535.
    pub window_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PgmFormat {
    P5Gray16BigEndian,
}

/// Encodes `image` as binary PGM, linearly mapping `[min, max]` onto
/// `0..=65535`.
pub fn encode_pgm(image: &ImageGrid) -> (Vec<u8>, ImageSidecar) {
    let (min, max) = image.min_max();
    let span = max - min;
    let header = format!("P5\n{} {}\n65535\n", image.width, image.height);
    let mut bytes = Vec::with_capacity(header.len() + 2 * image.values.len());
    bytes.extend_from_slice(header.as_bytes());
    for j in (0..image.height).rev() {
        for i in 0..image.width {
            let t = if span > 0.0 { (image.get(i, j) - min) / span } else { 0.0 };
            let level = (t * 65535.0).round().clamp(0.0, 65535.0) as u16;
            bytes.extend_from_slice(&level.to_be_bytes());
        }
    }
    let sidecar = ImageSidecar {
        format: PgmFormat::P5Gray16BigEndian,
        width: image.width,
        height: image.height,
        origin: image.origin,
        pixel_size: image.pixel_size,
        window_min: min,
        window_max: max,
    };
    (bytes, sidecar)
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `<stem>.pgm` and `<stem>.txt` into `dir`.
pub fn write_image(dir: &Path, stem: &str, image: &ImageGrid) -> Result<()> {
    let (bytes, sidecar) = encode_pgm(image);
    write_file(&dir.join(format!("{stem}.pgm")), bytes)?;
    write_file(&dir.join(format!("{stem}.txt")), toml::to_string(&sidecar)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recon::ProfileSample;

    #[test]
    fn profile_csv_round_trips() {
        let profile = AliasProfile {
            x0: Vec2::new(5.0, 7.0),
            theta: Vec2::new(0.0, 1.0),
            samples: vec![
                ProfileSample {
                    h: -0.25,
                    recon_scaled: 0.1 + 0.2,
                    predicted: -1.0 / 3.0,
                },
                ProfileSample {
                    h: 0.0,
                    recon_scaled: 0.0,
                    predicted: 1e-300,
                },
            ],
        };
        let csv = profile_csv(&profile);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(PROFILE_HEADER));
        assert!(!csv.contains('\r'));
        let parsed: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        assert_eq!(parsed[0], vec![-0.25, 0.1 + 0.2, -1.0 / 3.0]);
        assert_eq!(parsed[1][2], 1e-300);
    }

    #[test]
    fn pgm_layout() {
        let image = ImageGrid {
            origin: Vec2::new(0.0, 0.0),
            pixel_size: 1.0,
            width: 2,
            height: 2,
            // bottom row (0, 1), top row (2, 3)
            values: vec![0.0, 1.0, 2.0, 3.0],
        };
        let (bytes, side) = encode_pgm(&image);
        let header = b"P5\n2 2\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        let levels: Vec<u16> = bytes[header.len()..]
            .chunks(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect();
        assert_eq!(levels, vec![43690, 65535, 0, 21845]);
        assert_eq!((side.window_min, side.window_max), (0.0, 3.0));
    }
}
