//! Instance analysis toolkit for the BBOB benchmark suite.
//!
//! * [`suite`]: seeded instance generation and evaluation of the 24 functions.
//! * [`doe`]: Latin Hypercube designs shared across instances.
//! * [`ela`]: landscape features computed from a design without extra sampling.
//! * [`stats`]: two-sample tests, Benjamini-Hochberg correction, rejection rates.
//! * [`optim`]: baseline derivative-free optimizers and a fixed-budget harness.
//! * [`experiment`]: configuration and orchestration of the CSV-emitting experiments.

pub mod error;
pub mod rng;
pub mod doe;
pub mod ela;
pub mod experiment;
pub mod optim;
pub mod stats;
pub mod suite;

pub use error::{Error, Result};
