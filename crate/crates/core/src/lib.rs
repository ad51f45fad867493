//! Exact Gaussian-kernel dynamics for the one-dimensional Hartree equation
//! with quadratic confinement and quadratic nonlocal interaction.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exact_states;
pub mod hamilton_ehrenfest;
pub mod io;
pub mod model;
pub mod oracle;
pub mod propagator;
pub mod symmetry;
pub mod wavefunction;

pub use error::{Error, Result};
