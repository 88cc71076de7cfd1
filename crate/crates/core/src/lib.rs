//! Exact and stochastic analysis of the inhomogeneous multispecies
//! t-PushTASEP on a ring.

pub mod error;
pub mod numeric;
pub mod xpoly;
pub mod chain;
pub mod hecke;
pub mod diagrams;
pub mod observables;
pub mod montecarlo;
pub mod verify;
pub mod cli;

pub use error::{Error, Result};
