//! Error trade-off bounds for triples of incompatible qubit observables.
//!
//! The crate covers the whole numerical pipeline:
//!
//! - [`qubit`]: Bloch-vector algebra of observables and effects, plus
//!   the carrier-transition rotation used to prepare and measure an ion qubit.
//! - [`fermat`]: the Fermat–Torricelli point (geometric median) of a point set.
//! - [`joint`]: joint-measurability tests for pairs and triples and the
//!   construction of the joint POVMs whose marginals are the given observables.
//! - [`uncertainty`]: the binary Wasserstein error functionals.
//! - [`bound`]: penalty-method lower bounds of the total error over jointly
//!   measurable approximations.
//! - [`scenarios`]: canonical target triads and parameter sweeps.
//! - [`ion`]: pulse synthesis and shot-noise simulation of the measurement
//!   protocol.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel drivers live in the `trijm` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod math;

pub mod bound;
pub mod error;
pub mod fermat;
pub mod ion;
pub mod joint;
pub mod optim;
pub mod qubit;
pub mod scenarios;
pub mod tol;
pub mod uncertainty;
pub mod vec3;

pub use error::Error;
pub use vec3::Vec3;

/// Alias used throughout the crate.
pub type Result<T, E = Error> = core::result::Result<T, E>;
