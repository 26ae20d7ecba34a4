// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A chain or rate-model parameter is out of its domain.
    InvalidParameter(String),
    /// The requested system is larger than the configured cap for this path.
    DimensionCap { n_sites: usize, cap: usize },
    /// The NMR rate denominator vanished.
    SingularRate { t: f64 },
    /// `shift_at` called on a model without an energy shift.
    NoShift,
    /// The adaptive step size fell below the floor.
    StepUnderflow { t: f64, h: f64 },
    /// A density-matrix invariant was violated during integration.
    InvariantViolation { t: f64, what: &'static str, value: f64 },
    /// The stationary null space is not one-dimensional.
    DegenerateNullSpace { dimension: usize },
    /// The state does not fit the excitation-number block layout.
    NotBlockDiagonal,
    /// A numerical routine did not converge.
    NoConvergence(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DimensionCap { n_sites, cap } => {
                write!(f, "{n_sites} sites exceeds the cap of {cap} for this operation")
            }
            Error::SingularRate { t } => write!(f, "dephasing rate is singular at t = {t}"),
            Error::NoShift => write!(f, "rate model has no energy shift"),
            Error::StepUnderflow { t, h } => {
                write!(f, "step size underflow at t = {t} (h = {h:e}); problem too stiff")
            }
            Error::InvariantViolation { t, what, value } => {
                write!(f, "invariant violated at t = {t}: {what} = {value:e}")
            }
            Error::DegenerateNullSpace { dimension } => {
                write!(f, "stationary null space has dimension {dimension}, expected 1")
            }
            Error::NotBlockDiagonal => {
                write!(f, "state has coherences between different excitation numbers")
            }
            Error::NoConvergence(what) => write!(f, "{what} did not converge"),
        }
    }
}

impl core::error::Error for Error {}
