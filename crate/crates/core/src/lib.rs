//! Sparse signal recovery with the fraction-function penalty.
//!
//! The crate implements the machinery for solving the regularized problem
//!
//! ```text
//! min over x:  ||A x - b||_2^2 + lambda * sum_i a|x_i| / (a|x_i| + 1)
//! ```
//!
//! on underdetermined systems (m <= n):
//!
//! * [`penalty`] — the fraction function, the penalty sum, the regularized
//!   objective and its majorizing surrogate, and the scalar 1-D objective.
//! * [`prox`] — the closed-form scalar thresholding operator (trigonometric
//!   shrinkage with a hard threshold), its convex-regime variant, the vector
//!   operator, and a brute-force 1-D oracle used for validation.
//! * [`solvers`] — the gradient step `B_mu`, four iterative thresholding
//!   solvers (IFPTA-S1/S2, CIFPTA-S1/S2) with adaptive parameter selection,
//!   and a soft-thresholding ISTA baseline.
//! * [`bench`] — seeded Gaussian instances, sparse test signals, recovery
//!   metrics, and success-rate sweeps over sparsity.
//! * [`model`] — the problem instance, parameter records, and run traces.
//! * [`rng`] — the counter-based SplitMix64 generator that makes every
//!   experiment reproducible from a single seed.
//!
//! The crate is `no_std`-compatible (with `alloc`); disable default features
//! and enable `libm` to build without the standard library.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("fracprox-core requires either the `std` or the `libm` feature");

pub mod bench;
pub mod error;
pub mod model;
pub mod penalty;
pub mod prox;
pub mod rng;
pub mod solvers;

mod float;
mod linalg;

pub use error::{Error, Result};
pub use model::{
    FractionPenaltyParams, ProblemInstance, SolverRun, StopReason, StoppingRule,
};
