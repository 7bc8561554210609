//! Single-neuron stealth attacks on dense feed-forward networks.
//!
//! The crate covers the whole attack pipeline on an in-memory [`Network`]:
//!
//! * [`model`]: dense layers, forward evaluation, the latent/head split and
//!   input gradients of latent projections.
//! * [`geometry`]: seeded sampling on spheres and subspheres, latent radius
//!   estimation and the achieved accuracy `alpha`.
//! * [`attack`]: construction of the attack neuron for plain and targeted
//!   attacks.
//! * [`trigger`]: projected-gradient search for trigger inputs.
//! * [`bounds`]: success-probability bounds and spherical-cap terms.
//! * [`planting`]: network surgery for the three planting scenarios and the
//!   susceptibility ranking of neurons.
//! * [`verify`]: stealth checks on concrete validation sets and Monte Carlo
//!   estimates of the geometric success event.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, hashing and the
//! command-line tool live in the `stealth-toolkit` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod attack;
pub mod bounds;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod planting;
pub mod rng;
pub mod trigger;
pub mod verify;

mod error;

pub use attack::{AttackNeuron, AttackParams, GKind, Sign};
pub use bounds::{BoundQuery, BoundReport, CollapseTerms};
pub use error::{Error, ErrorKind, Result};
pub use geometry::SphereSample;
pub use model::{Activation, DenseLayer, InputBox, LatentSplit, Network, SkipUnit};
pub use planting::SusceptibilityRanking;
pub use trigger::{TriggerResult, TriggerSearchConfig};
pub use verify::{Histogram, StealthReport};
