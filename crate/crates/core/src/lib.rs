//! Scaling-law analysis for masked diffusion language models.
//!
//! The crate is `no_std` (with `alloc`) and purely computational. It covers:
//!
//! - [`ingest`]: run records, Gaussian loss smoothing, the `6ND` FLOPs rule and
//!   transformer parameter counting.
//! - [`isoflop`]: per-budget parabola fits and the power-law efficient frontier.
//! - [`laws`] and [`fit`]: the compute-constrained, data-constrained and
//!   additive-overfitting loss laws, fitted by Huber loss on log-losses with a
//!   grid of L-BFGS starts.
//! - [`allocate`]: compute-optimal `(N, D)`, maximum epochs for a fixed model
//!   and data budget, and the joint `(N, e)` optimum for a data budget.
//! - [`diffusion`]: schedules, transition kernels, forward corruption, reverse
//!   transitions and Monte Carlo loss estimators.
//! - [`oracle`]: synthetic run generators and brute-force reference solvers.
//!
//! File formats and the command-line interface live in the `dlmscale-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod allocate;
pub mod builtin;
pub mod diffusion;
mod error;
pub mod fit;
pub mod ingest;
pub mod isoflop;
pub mod laws;
pub mod optim;
pub mod oracle;
mod rng;

pub use error::{Error, Result};
pub use rng::derive_seed;
