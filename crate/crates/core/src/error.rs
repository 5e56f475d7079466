use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("adaptive quadrature did not converge on [{lo}, {hi}] (estimated error {estimate:e})")]
    QuadratureNotConverged { lo: f64, hi: f64, estimate: f64 },

    #[error("point ({x}, {y}) coincides with the source position of view angle {alpha}")]
    DegeneratePoint { x: f64, y: f64, alpha: f64 },

    #[error("source at angle {alpha} lies inside the phantom")]
    SourceInsidePhantom { alpha: f64 },

    #[error("reconstruction point lies on the phantom boundary")]
    PointOnBoundary,

    #[error("tangency at alpha = {alpha} has contact order >= 2 (M = {m:e})")]
    HigherOrderContact { alpha: f64, m: f64 },

    #[error("no tangency of an integration curve through the probe point lies in the angular window")]
    NoTangency,

    #[error("q = {q} falls outside the filtered grid [{lo}, {hi}] of view {view}; extend the grid")]
    OutsideFilterGrid { view: i64, q: f64, lo: f64, hi: f64 },

    #[error("degenerate profile: prediction has zero peak-to-peak amplitude")]
    DegenerateProfile,

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("cannot parse config: {0}")]
    ConfigParse(#[from] toml::de::Error),

    #[error("cannot serialize report: {0}")]
    Serialize(#[from] toml::ser::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
