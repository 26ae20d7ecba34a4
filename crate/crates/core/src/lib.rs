// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Exciton transport through a chain of coupled two-level systems under
//! time-dependent (possibly non-Markovian) local dephasing.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! - [`chain`], [`rate`], [`operators`]: the chain description, the dephasing
//!   rate models and the Kronecker-embedded site operators and Hamiltonian;
//! - [`liouvillian`]: the master-equation right-hand side, both on dense
//!   density matrices and vectorised as a superoperator;
//! - [`sector`]: the excitation-number block representation used by the
//!   time integrator;
//! - [`evolution`]: adaptive integration, periodic steady states and the
//!   algebraic null-space steady state;
//! - [`metrics`]: currents, occupation spread, non-Markovianity measures and
//!   complete-positivity checks on rate models.
//!
//! # Basis convention
//!
//! The state space of `N` sites has dimension `2^N`. Site 1 is the leftmost
//! (most significant) tensor factor, and within each site index 0 is the
//! excited state and index 1 the ground state, so `σᶻ = diag(1, -1)` and
//! `σ⁺ = |e⟩⟨g|`. See [`basis`].

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod basis;
pub mod chain;
pub mod density;
mod error;
pub mod evolution;
pub mod gmres;
pub mod integrate;
pub mod liouvillian;
pub mod metrics;
pub mod operators;
pub mod quadrature;
pub mod rate;
pub mod sector;

pub use chain::{ChainSpec, Port};
pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use evolution::{IntegratorConfig, SteadyStateResult, TrajectoryResult};
pub use liouvillian::GeneratorContext;
pub use operators::{SiteOperatorSet, SparseOp};
pub use rate::RateModel;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
