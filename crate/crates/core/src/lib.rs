//! Blind interference alignment for the K-user single-antenna interference
//! channel with reconfigurable receive antennas.
//!
//! - [`scheme`] builds the binary basis matrix, the antenna switching
//!   patterns and the shared binary precoders from `(K, r)`.
//! - [`verifier`] checks independence, alignment, separability,
//!   decodability and dimension counting by exact rank computations over
//!   `GF(2^61 - 1)` at random channel evaluations.
//! - [`sim`] runs a zero-forcing link simulation and fits the DoF slope.
//! - [`dof_bounds`] evaluates the closed-form sum DoF and its optimal `r`.

pub mod cli;
pub mod combinatorics;
pub mod dof_bounds;
pub mod error;
pub mod exact_rank;
pub mod exec;
pub mod field;
mod rational;
pub mod scheme;
pub mod seeding;
pub mod sim;
pub mod verifier;

pub use combinatorics::Coalition;
pub use dof_bounds::{block_length, optimal_r, sum_dof_formula, Dof};
pub use error::{BiaError, Result};
pub use exec::Execution;
pub use scheme::{BiaScheme, BinaryMatrix, PrecoderSet, SchemeParams, SwitchMatrix};
pub use verifier::{verify, VerificationReport, VerifiedScheme};
