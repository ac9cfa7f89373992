//! Analysis toolkit for a planar predator-prey model with an additive Allee
//! effect on the prey and group-defense (Holling type IV) predation.
//!
//! The crate provides, in closed form where the model admits it and
//! numerically elsewhere:
//!
//! - [`model`]: the vector field, its analytic Jacobian, and the
//!   weak/strong Allee regime split;
//! - [`equilibria`]: every fixed point (origin, axial, coexistence) with
//!   existence rationales;
//! - [`stability`]: eigenvalue classification plus the closed-form
//!   stability thresholds of each equilibrium family;
//! - [`dynamics`]: adaptive Dormand-Prince 5(4) trajectory integration and
//!   attractor identification;
//! - [`bifurcation`]: one-parameter sweeps, transcritical/oscillation-onset
//!   (Hopf) location, and discriminant folds;
//! - [`basin`]: basin-of-attraction grids for bistability studies;
//! - [`config`]: the `key = value` run-configuration format used by the
//!   command-line front end.

pub mod basin;
pub mod bifurcation;
pub mod config;
pub mod dynamics;
pub mod equilibria;
pub mod model;
pub mod stability;

pub use model::{AlleeRegime, Matrix2, ModelError, ModelParams, ParamName, State};

/// Canonical parameter sets for the two bundled studies.
///
/// Both share `r = 1`, `K = 1`, `w = 0.3`, `a = 0.6`, `delta = 0.1`; the
/// Allee severity `h` is 0.2 (weak) or 0.4 (strong) in either study.
pub mod scenarios {
    use crate::model::ModelParams;

    /// Predation-conversion study: `b = 0.7` fixed, `c` varies.
    pub fn conversion_study(c: f64, h: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, 0.3, h, 0.6, 0.7, c, 0.1).expect("scenario params are valid")
    }

    /// Environmental-protection study: `c = 0.2` fixed, `b` varies.
    pub fn protection_study(b: f64, h: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, 0.3, h, 0.6, b, 0.2, 0.1).expect("scenario params are valid")
    }
}
