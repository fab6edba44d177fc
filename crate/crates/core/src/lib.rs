//! Adaptive orthogonal projections: classical solvers, the closed-form
//! spectral iteration, and a gate-level simulation of the quantum iteration.

pub mod circuit;
pub mod classical;
pub mod error;
pub mod graphprep;
pub mod numkit;
pub mod pipeline;
pub mod qsim;
pub mod spectral;

pub use error::{Error, Result};
