//! Computational tools for the Airy_β line ensemble: exact Dunkl-operator
//! moments, the walk expansion behind them, lattice path kernels, Brownian
//! functionals, blocks integrals and matrix-model samplers.

pub mod dunkl;
pub mod walks;
pub mod bridges;
pub mod paths;
pub mod blocks;
pub mod ensembles;
pub mod acceptance;
pub mod error;
pub mod scalar;

pub use error::{LabError, Result};
pub use scalar::Rational;
