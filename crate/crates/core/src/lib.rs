//! Discrete harmonic functions for zero-drift lattice walks in orthants.
//!
//! Exact rational arithmetic throughout; floating point appears only in the
//! cone geometry (angles) and in the optional Monte Carlo estimator.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cone;
pub mod harmonic;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod poly;
pub mod prescribe;
#[cfg(test)]
mod properties;
pub mod rational;
pub mod stepset;

pub use poly::{MultiPoly, PolyError};
pub use rational::Rational;
pub use stepset::{Step, StepSet, StepSetError};
