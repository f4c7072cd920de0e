//! Coarse-grained energy-flux diagnostics for periodic velocity fields.
//!
//! The crate hosts the building blocks of a dissipation-analysis toolkit:
//!
//! * [`grid`] — periodic multi-component fields, increments, L^p norms;
//! * [`onsf`] — the ONSF binary field format;
//! * [`spectral`] — Fourier differentiation on the torus;
//! * [`kernels`] — discretized mollifiers and the mollification operator;
//! * [`synth`] — synthetic velocity/pressure generators;
//! * [`pressure`] — Leray projection, pressure recovery, residual checks;
//! * [`flux`] — Duchon–Robert / Constantin–E–Titi flux fields, scale sweeps,
//!   trilinear forms and the smooth/rough decomposition diagnostics;
//! * [`norms`] — BMO/VMO, Besov-type and longitudinal-increment estimators;
//! * [`traces`] — one-sided interface traces, jump residuals and surface
//!   dissipation on planar interfaces.

pub mod error;
pub mod flux;
pub mod grid;
pub mod kernels;
pub mod norms;
pub mod onsf;
pub mod pressure;
pub mod spectral;
pub mod synth;
pub mod traces;
pub mod util;

pub use error::{Error, Result};
pub use grid::{GridField, TimeSeriesField};
pub use kernels::{DiscreteKernel, KernelProfile};
