//! Optimal social-restriction and vaccination policies for the controlled
//! SVIR epidemic model, computed by the forward-backward sweep method.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: parameters, state, vector fields, reproduction number, equilibria
//! - [`integrate`]: fixed-step RK4 forward and backward, trapezoid quadrature
//! - [`control`]: transmission map, social costs, pointwise optimal controls
//! - [`adjoint`]: Hamiltonian, costate dynamics, cost functional
//! - [`fbs`]: the sweep itself
//! - [`scenarios`]: benchmark strategies, cost tables, sweeps, presets
//! - [`cli`]: configuration files and the `svir` command-line front end

pub mod adjoint;
pub mod cli;
pub mod control;
pub mod error;
pub mod fbs;
pub mod integrate;
pub mod model;
pub mod scenarios;

pub use error::{Error, NumericalFailure, Result};
