//! Reconstruction of 1D signals and 2D images from limited linear
//! measurements (notably partial Fourier data) using an lp gradient penalty
//! whose exponent varies over the domain.
//!
//! The exponent field is designed automatically: multiple homogeneous TV and
//! Tikhonov reconstructions of the same measurement are pooled patchwise, the
//! patches are classified into discontinuity / oscillation / smooth features,
//! and each class receives its exponent. The resulting convex problem is
//! solved by ADMM with a separable gradient prox.

pub mod admm;
pub mod cli;
pub mod error;
pub mod config;
mod fft;
pub mod exponent;
pub mod io;
pub mod numerics;
pub mod operators;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
