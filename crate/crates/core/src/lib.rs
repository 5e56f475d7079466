pub mod error;
pub mod experiment;
pub mod geometry;
pub mod output;
pub mod predictor;
pub mod quadrature;
pub mod recon;
pub mod sinogram;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
