//! Fibonacci-weighted and orthogonalized ensembles of regression learners.
//!
//! The crate is organised bottom-up:
//!
//! - [`weights`] builds normalized weight vectors from named laws and
//!   reports their concentration and spectrum.
//! - [`linalg`] has the small dense kernels everything else needs.
//! - [`learners`] fits random Fourier feature and polynomial ridge models
//!   and arranges them into pools.
//! - [`ensemble`] aggregates pools, whitens them, optimizes weights and runs
//!   the second-order recursive flow.
//! - [`experiments`] is the Monte Carlo harness behind the `fibens` binary.

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod learners;
pub mod linalg;
pub mod rng;
pub mod weights;

pub use error::{Error, Result};

// Compiles the guide's code blocks under `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/weights.md")]
    mod weights {}
    #[doc = include_str!("../../../book/src/learners.md")]
    mod learners {}
    #[doc = include_str!("../../../book/src/orthogonalization.md")]
    mod orthogonalization {}
    #[doc = include_str!("../../../book/src/flow.md")]
    mod flow {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/results.md")]
    mod results {}
}
