//! Simulation and limit-theorem numerics for epidemic models in which every
//! infected individual carries a random, infection-age-dependent infectivity
//! function.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure numerics:
//!
//! * [`infectivity`]: random infectivity laws, path sampling and every
//!   deterministic functional of the law (means, covariances, joint indicator
//!   moments, sojourn distributions).
//! * [`simulator`]: exact event-driven simulation of the `N`-individual
//!   SIR/SEIR/SIS/SIRS epidemics by thinning against the aggregate force of
//!   infection.
//! * [`flln`]: the deterministic Volterra limit equations.
//! * [`fclt`]: Gaussian driver kernels, driver sampling and the linear
//!   stochastic Volterra equations for the fluctuation limit.
//! * [`prm`]: moment identities of compensated Poisson random measures.
//!
//! File formats, configuration, the command-line driver and the Monte Carlo
//! verification harness live in the companion `varinf` crate.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod duration;
pub mod error;
pub mod fclt;
pub mod flln;
pub mod grid;
pub mod infectivity;
pub(crate) mod math;
pub(crate) mod par;
pub(crate) mod volterra;
pub mod prm;
pub mod rng;
pub mod setup;
pub mod simulator;
pub mod stats;
pub mod variant;

pub use duration::DurationLaw;
pub use error::{Error, Result};
pub use grid::Grid;
pub use infectivity::{
    AgeCondition, Estimate, Family, InfectivityModel, InfectivityPath, RegularityDescriptor,
    Region, RoleTag, SojournTable,
};
pub use setup::{InitialFractions, ModelSet};
pub use variant::Variant;
