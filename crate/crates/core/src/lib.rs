//! Outcome retrodiction for generalised quantum measurements.
//!
//! The crate decides when the outcome of a measurement can be recovered from
//! the post-measurement state alone, either with certainty for every input
//! or unambiguously for a known input, builds the retrodicting measurements,
//! and checks the verdicts by Monte Carlo simulation.

pub mod catalog;
pub mod cli;
pub mod dependence;
pub mod error;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod perfect;
pub mod random;
pub mod simulation;
pub mod synthesis;
pub mod unambiguous;

pub use error::{Error, Result};
