//! Near-field (Poisson spot) and far-field (grating diffraction) matter-wave
//! interferometry models for massive particles.
//!
//! * [`particles`] and [`constants`]: species parameters and SI constants.
//! * [`farfield`]: closed-form feasibility constraints for a far-field
//!   interferometer.
//! * [`interaction`]: Casimir-Polder eikonal phases, momentum kicks and
//!   capture radii for sphere and disc obstacles.
//! * [`poisson`]: Fresnel-Kirchhoff diffraction behind a circular obstacle,
//!   with source-size and velocity averaging.
//! * [`classical`]: the ray-optics counterpart of the same setup and a
//!   quantum/classical distinguishability measure.

// NaN-rejecting guards are written as negated comparisons
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod constants;
pub mod error;
pub mod farfield;
pub mod interaction;
pub mod kv;
pub mod numerics;
pub mod particles;
pub mod poisson;
pub mod report;

pub use error::{Error, Result};
