//! Finite-difference micromagnetics on a regular grid of cubic cells.
//!
//! The crate computes the demagnetization field by zero-padded FFT
//! convolution with a precomputed demag tensor, adds exchange, uniaxial
//! anisotropy and applied fields, and integrates the Landau-Lifshitz-Gilbert
//! equation with an explicit Euler step followed by renormalization.
//!
//! Units are nm, ns and kA/m throughout (see [`material`]).

pub mod backend;
pub mod benchmark;
pub mod config;
pub mod demag;
pub mod energy;
pub mod error;
pub mod fields;
pub mod grid;
pub mod llg;
pub mod material;
pub mod problems;
pub mod real;
pub mod trajectory;
pub mod validate;

pub use backend::Backend;
pub use error::{Error, Result};
pub use grid::{average_magnetization, init_uniform, renormalize, Grid, Vec3, VectorField};
pub use material::MaterialParams;
pub use real::{Precision, Real};
