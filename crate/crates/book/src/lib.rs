//! The chapters of the guide under `book/src`, included so that
//! `cargo test` runs every Rust code block in them.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}

#[doc = include_str!("../../../book/src/psi.md")]
pub mod psi {}

#[doc = include_str!("../../../book/src/geometry.md")]
pub mod geometry {}

#[doc = include_str!("../../../book/src/data.md")]
pub mod data {}

#[doc = include_str!("../../../book/src/fbp.md")]
pub mod fbp {}

#[doc = include_str!("../../../book/src/prediction.md")]
pub mod prediction {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
