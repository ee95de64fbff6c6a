//! Pseudospectral laboratory for the normalized CH-KP equation and the
//! hyperelastic compressible plate model: time stepping, traveling-wave
//! continuation, symmetry and steadiness detectors, weak-form quadrature for
//! peaked waves and the scale map to the physical CH-KP equation.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod io;
pub mod model;
pub mod spectral;
pub mod timestep;
pub mod transform;
pub mod twsolve;
pub mod weakform;

pub use error::{Error, Result};
