//! Operator dualities for population-genetics Markov processes.
//!
//! The crate builds ladder-operator representations, evaluates duality
//! functions, constructs generators and samplers for Wright-Fisher, Moran,
//! inclusion and coalescent processes, and verifies duality relations both
//! exactly (matrix exponentials, rational arithmetic) and statistically
//! (seeded Monte Carlo).

// `!(v > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod cli;
pub mod dualities;
pub mod error;
pub mod exact;
pub mod montecarlo;
pub mod numeric;
pub mod processes;
pub mod rational;
pub mod tolerances;

pub use error::{Error, Result};
