//! Adaptive biasing force dynamics through an interacting particle system.
//!
//! The crate provides
//! - a catalog of potentials on `T_L x R^{d-1}` ([`potential`]),
//! - the compactly supported mollifier of the force estimator ([`kernel`]),
//! - naive and binned Nadaraya-Watson estimators ([`estimator`]),
//! - Euler-Maruyama integrators for ABF, Langevin and zero-bandwidth dynamics ([`dynamics`]),
//! - exact mean force and free energy by quadrature ([`reference`]),
//! - heat-equation and Fokker-Planck grid oracles ([`pde`]),
//! - error metrics and convergence fits ([`metrics`]).

// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod estimator;
pub mod kernel;
pub mod metrics;
pub mod pde;
pub mod potential;
pub mod profile;
pub mod quadrature;
pub mod reference;
pub mod rng;

pub use dynamics::{InitialCondition, Mode, ParticleEnsemble, SimulationConfig};
pub use error::{Error, Result};
pub use kernel::KernelSpec;
pub use potential::{wrap, Potential, TorusConfiguration};
pub use profile::{Grid, MeanForceProfile, ProfileKind};
