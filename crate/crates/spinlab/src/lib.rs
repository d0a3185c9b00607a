//! Numerical toolkit for two spin-dynamics programs: entanglement generated
//! between neutrons that scatter in sequence off a macroscopic spin sample,
//! and quantum state transfer through Heisenberg- and dipole-coupled spin
//! chains and rings.
//!
//! Every closed-form expression is exposed as a function and paired with an
//! independent brute-force propagation so the two can be compared.
//!
//! Conventions: natural units with `hbar = 1`; `|0>` is spin up, `|1>` spin
//! down; in tensor products the leftmost factor is the most significant.

pub mod barrier;
pub mod chains;
pub mod cli;
pub mod entmeas;
pub mod error;
pub mod multiscatter;
pub mod optimize;
pub mod qcore;
pub mod scatter;

pub use error::{Error, Result};
