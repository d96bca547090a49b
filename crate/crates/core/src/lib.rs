//! Simulator for a two-spin NMR quantum computer.

pub mod algebra;
pub mod config;
pub mod error;
pub mod experiments;
pub mod pulse;
pub mod sequence;
pub mod shaped;

pub use error::{Error, Result};
