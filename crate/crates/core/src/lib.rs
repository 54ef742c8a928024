//! One-dimensional compressible barotropic multicomponent Navier-Stokes
//! solver with pressure-dependent viscosity, plus the verification harness
//! that audits the structural estimates the model satisfies: the two entropy
//! budgets, density bounds, the transported mass-fraction gradient, and the
//! exponential stability of nearby trajectories.

// Stencil loops index several same-length arrays at once; iterator zips
// would obscure them.
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod constitutive;
pub mod diagnostics;
pub mod error;
mod fields;
pub mod grid;
pub mod output;
pub mod quadrature;
pub mod solver;
pub mod thermo;

pub use error::{Error, Result};
pub use grid::{Boundary, Grid, State};
