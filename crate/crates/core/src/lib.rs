//! Coherent dynamics of a phonon-dressed two-level quantum dot coupled to the
//! fundamental and second-harmonic modes of a χ⁽²⁾ microcavity.
//!
//! * [`model`]: physical parameters, polaron shift, Huang–Rhys factor,
//!   dressed couplings and the material formula for `g_nl`.
//! * [`manifold`]: the six coupled amplitude equations and their RK4
//!   integration.
//! * [`baseline`]: closed forms for the two-state limits.
//! * [`oracle`]: truncated Fock-space reference propagator.
//! * [`config`] and [`runner`]: batch runs, sweeps and presets.

// `!(x >= 0.0)` guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod baseline;
pub mod config;
pub mod error;
pub mod manifold;
pub mod model;
pub mod oracle;
pub mod runner;

pub use error::{Error, Result};
pub use manifold::{
    excited_population, integrate, Amplitude, DynamicsParams, DynamicsSpec, ManifoldAmplitudes,
    ManifoldIndex, TimeGrid, TimeSeries,
};
pub use model::{ModelParams, PhononMode, PhononSpectrum};
