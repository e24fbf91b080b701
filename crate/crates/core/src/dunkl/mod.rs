//! Exact Dunkl operator engine.

pub mod bessel;
pub mod commutator;
pub mod moments;
pub mod profile;
pub mod raw;

pub use bessel::{bessel_beta2, eigenrelation_residual_beta2, EigenResidual};
pub use commutator::{check_commutation, check_nested_commutator};
pub use moments::{corners_moment, dbm_moment, scaled_edge_moment, EdgeMoment, MomentMode, MomentQuery};
pub use profile::{apply_dunkl, apply_power_sum, EngineLimits, OperatorSpec, Profile, ProfileSum};
