//! Exact computational engine for the battery--discharge model (BDM) of the
//! joint linear complexity of multisequences over finite fields.
//!
//! The crate has two halves that check each other:
//!
//! * [`field`] computes joint linear complexity profiles directly, by
//!   Gaussian elimination over a prime field, and can exhaustively count
//!   deviation values over all prefixes of a given shape. It knows nothing
//!   about the model below.
//! * [`state`], [`mass`], [`partitions`] and [`gamma`] implement the BDM: an
//!   infinite-state Markov chain whose states carry the deviations of the
//!   complexity profile, whose per-class state counts are partition numbers,
//!   and whose stationary masses follow `q^{-K(s)}` laws with a closed
//!   formula for the asymptotic deviation distribution.
//!
//! [`verify`] replays the correspondence between the two halves (and the
//! model's internal identities) as reproducible pass/fail campaigns; the
//! `bdm` binary exposes everything on the command line.
//!
//! All verified quantities are exact rationals; floating point appears only
//! in statistical summaries of Monte Carlo runs.
//!
//! The `book/` directory of the repository walks through the theory chapter
//! by chapter; its code snippets compile and run as doc-tests of this crate.

pub mod field;
pub mod gamma;
pub mod mass;
pub mod partitions;
pub mod rational;
pub mod state;
pub mod verify;

pub use rational::Ratio;
pub use state::{ActionKind, BdmState};

// Every code fence in the guide is compiled and executed by `cargo test`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/linear-complexity.md")]
    mod linear_complexity {}
    #[doc = include_str!("../../../book/src/battery-discharge.md")]
    mod battery_discharge {}
    #[doc = include_str!("../../../book/src/classes-and-partitions.md")]
    mod classes_and_partitions {}
    #[doc = include_str!("../../../book/src/stationary-mass.md")]
    mod stationary_mass {}
    #[doc = include_str!("../../../book/src/deviation-distribution.md")]
    mod deviation_distribution {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
