//! Waiting-time analysis for `N` parallel Bernoulli "memories" with a finite
//! validity window.
//!
//! The model: `N` independent bits start at 0. Each step, every remaining
//! 0-bit flips to 1 with probability `p`. Once the first bit flips, all bits
//! must be flipped within `tau` further steps, otherwise the whole system
//! resets and a new round starts (optionally paying an extra `omega` steps
//! per reset). The crate computes the expected number of steps until a round
//! succeeds, by three independent routes:
//!
//! * [`analytic`] — closed forms for round success probability, expected
//!   round length, the expected total step count, its infinite-window limit,
//!   and the reset-time extension.
//! * [`enumeration`] — exhaustive enumeration of the finite space of
//!   per-step flip-count trajectories, with the exact product measure; used
//!   as a brute-force oracle for the closed forms.
//! * [`simulation`] — a step-faithful Monte Carlo engine with reproducible
//!   counter-based per-game random streams.
//!
//! [`stability`] holds the numerically careful evaluation paths (log1p/expm1
//! powers, compensated alternating sums, finite-window approximation of the
//! infinite-window limit) and truncation checks for the series identities the
//! closed forms rest on.
//!
//! The crate is `no_std`-compatible (requires `alloc`); enable the `libm`
//! feature when building without `std`.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("repeater-rates-core needs either the `std` or the `libm` feature");

extern crate alloc;

pub mod analytic;
mod combinatorics;
pub mod compensated;
pub mod enumeration;
mod math;
pub mod params;
pub mod simulation;
pub mod stability;

pub use analytic::{full_report, game_expectation, RateReport};
pub use params::{validate_params, GameParams, Trajectory};
pub use simulation::{estimate, SimMode, SimStats};
