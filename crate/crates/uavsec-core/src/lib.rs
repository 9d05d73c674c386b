//! Core library for secrecy-rate maximization in multi-UAV rate-splitting
//! downlink networks.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`] — dense complex linear algebra (Cholesky, dominant
//!   eigenvectors, triangular inverses) used by every other module.
//! - [`scenario`] — network geometry, UAV motion, and Rician air-to-ground
//!   channel generation.
//! - [`rates`] — common/private SINRs, eavesdropper rates, secrecy rates, and
//!   constraint residuals for a candidate beamforming solution.
//! - [`hnet`] — the iterative beamforming + rate-allocation solver built from
//!   whitened dominant-eigenvector closed forms, and its unfolded, learnable
//!   variant.
//! - [`nn`] — a minimal real-valued neural network engine with exact
//!   backpropagation (dense, 3x3 conv, batchnorm, relu, maxpool, tanh) and an
//!   Adam optimizer.
//! - [`rl`] — the two-agent environment, reward shaping, replay buffers, and
//!   the DDPG training loop.
//! - [`oracle`] — brute-force references (random-search beamforming, grid
//!   trajectory enumeration) used by tests and benchmarks.
//!
//! The crate is `no_std`-compatible (with `alloc`); all file IO, CLI, and CSV
//! emission live in the companion `uavsec-cli` crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod hnet;
pub mod linalg;
pub mod nn;
pub mod oracle;
pub mod rates;
pub mod rl;
pub mod scenario;

pub use linalg::{ComplexMatrix, LinalgError, C64};
