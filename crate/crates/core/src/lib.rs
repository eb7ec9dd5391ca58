//! Transient tunneling of a cut-off plane wave through piecewise-constant
//! barriers, by resonant-state expansion, with a Crank–Nicolson cross-check.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod oracle;
pub mod resonances;
pub mod runner;
pub mod scattering;
pub mod special;
pub mod transient;
pub mod units;

pub use error::{Error, Result};
