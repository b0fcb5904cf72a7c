//! Periodic GARCH and periodic ACD models with Fourier and wavelet
//! reduction of their periodic parameters.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod harmonic;
pub mod innovations;
pub mod model;
pub mod optimize;
pub mod pacd;
pub mod persist;
pub mod pgarch;
mod recursion;
pub mod significance;
pub mod study;
pub mod wavelet;

pub use error::{Error, Result};
pub use model::{
    flatten, unflatten, Family, FitResult, InnovationLaw, InnovationSpec, ModelKind, ModelSpec, PeriodicVector,
};
pub use optimize::{FitOptions, GlobalInit, OptimizerConfig};
