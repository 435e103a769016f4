//! Linear-optical simulation of qudit teleportation with orbital angular
//! momentum photons.
//!
//! The crate is organised bottom-up:
//!
//! - [`fock`]: sparse multimode Fock states, partial traces, fidelities
//! - [`optics`]: beam splitters, mode unitaries and a permanent-based oracle
//! - [`antisym`]: determinant-built antisymmetric states and their partitions
//! - [`filter`]: the recursive Bell filter and coincidence post-selection
//! - [`teleport`]: single-qudit and collective teleportation protocols
//! - [`prep`]: recursive preparation of antisymmetric states
//! - [`cli`]: the command-line driver and its report format

pub mod antisym;
pub mod cli;
mod combinatorics;
pub mod error;
pub mod filter;
pub mod fock;
pub mod optics;
pub mod prep;
pub mod teleport;

pub use combinatorics::binomial;
pub use error::{Error, Result};
