//! Numerical laboratory for nucleation in multi-well martensite models:
//! well sets, polytopal microstructure scenes, exact and spectral energies,
//! explicit upper-bound constructions, Fourier cone diagnostics and scaling
//! sweeps.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constants;
pub mod constructions;
pub mod energy;
pub mod error;
pub mod fourier_lab;
pub mod geometry;
pub mod scaling;
pub mod spectral;
pub mod wells;

pub use error::{Error, Result};
