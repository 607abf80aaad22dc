//! Lexicase-family parent selection.
//!
//! This crate is `no_std` (with `alloc`) and contains only computation:
//!
//! * [`matrix`], [`elite`], [`shuffle`], [`rng`]: error matrices, case-elite
//!   filtering, MAD epsilons, uniform and weighted case orderings, and the
//!   seeded stream-derivation rule every stochastic operation follows.
//! * [`selectors`]: lexicase, epsilon, batch and weighted lexicase plus the
//!   aggregate baselines (tournament, fitness-proportionate, uniform).
//! * [`probability`]: the exact selection-probability oracle for small
//!   instances, plexicase, empirical estimation and total variation.
//! * [`sampling`]: random and informed downsampling with cost accounting.
//! * [`lazy`]: lexicase over on-demand, memoized evaluations.
//! * [`evolve`]: a small tree-GP harness that wires all of the above.
//!
//! IO, file formats and the command line live in the `lexicase-cli` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod elite;
pub mod error;
pub mod evolve;
pub mod lazy;
pub mod matrix;
pub mod probability;
pub mod rng;
pub mod sampling;
pub mod selectors;
pub mod shuffle;

pub use elite::{elite_survivors, mad_epsilons, widened_epsilons};
pub use error::{Error, Result};
pub use matrix::{ErrorMatrix, PoolView};
pub use probability::SelectionDistribution;
pub use rng::RandomSource;
pub use selectors::{SelectionTrace, SelectorConfig, Variant};
pub use shuffle::{shuffled_order, CaseOrdering};
