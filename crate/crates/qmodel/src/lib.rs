//! Memory-minimal quantum models of discrete stochastic processes, end to
//! end: generate a process, infer its quantum memory states, compile the
//! model unitary to elementary gates, simulate it under configurable noise
//! in Pauli-transfer-matrix form, and correct the outputs with
//! probabilistic error cancellation.
//!
//! The pieces compose as a pipeline but are usable on their own:
//!
//! - [`process`] — stationary binary sources (the perturbed coin),
//!   empirical conditional statistics, effective Markov order.
//! - [`inference`] — causal states and phase-less quantum memory states,
//!   state merging, and the memory measures `C_mu` and `C_q`.
//! - [`synthesis`] — model-unitary construction and cosine-sine
//!   decomposition into multiplexed rotations, NOTs, and ZYZ singles.
//! - [`ptm`] — states, channels, and measurements as Pauli transfer
//!   matrices; a noisy circuit simulator over them.
//! - [`mitigation`] — gate set tomography, quasiprobability
//!   decompositions, signed Monte Carlo sampling, and post-processing.
//! - [`pipeline`] — file-based orchestration of all stages plus the
//!   figure-data exporters used by the `qmodel` binary.
//!
//! Each runnable example exercises one capability; start with
//! `cargo run --release --example error_mitigation`.

// Index-based loops mirror the matrix arithmetic they implement.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod inference;
pub mod linalg;
pub mod mitigation;
pub mod pipeline;
pub mod process;
pub mod ptm;
pub mod synthesis;

pub use error::{Error, Result};
