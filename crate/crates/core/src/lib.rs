// SPDX-License-Identifier: Apache-2.0

//! Query-model simulation for in-place permutation oracles.
//!
//! The crate is `no_std` (with `alloc`). It provides permutations, a sparse
//! state-vector simulator, a small reversible circuit IR with abstract
//! oracle queries, the inversion algorithm for in-place oracles, oracle
//! simulation constructions, and an adversary-bound workbench.

#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod adversary;
pub mod analytic;
pub mod circuit;
pub mod error;
pub mod inversion;
pub mod linalg;
pub mod oracle;
pub mod oracle_sim;
pub mod perm;
pub mod statevec;

pub use error::{Error, Result};
pub use perm::Permutation;
pub use statevec::{RegisterLayout, StateVector};
