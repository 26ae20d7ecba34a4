// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-dependent dephasing rates γ(t).
//!
//! Every site sees the same rate. Rates may go negative; a negative value at
//! some instant marks a non-Markovian channel. Times are in units of 1/ω.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum RateModel {
    /// γ(t) = γ.
    Constant { gamma: f64 },
    /// γ(t) = γ sin(νt).
    Sine { gamma: f64, nu: f64 },
    /// γ(t) = γ + γ₀ sin(νt).
    OffsetSine { gamma: f64, gamma0: f64, nu: f64 },
    /// γ(t) = (γ/m) Σⱼ sin(νⱼt), the average of `m` sines.
    SineSum { gamma: f64, nus: Vec<f64> },
    /// Rate engineered through an Ising-coupled ancilla spin with coupling
    /// `j` prepared at angle `theta`:
    ///
    /// γ(t) = γ + πJ sin²(2θ) sin(2πJt) / (3 + 2cos(4θ) sin²(πJt) + cos(2πJt)),
    ///
    /// together with the energy shift returned by [`RateModel::shift_at`].
    Nmr { gamma: f64, j: f64, theta: f64 },
}

impl RateModel {
    pub fn constant(gamma: f64) -> Result<Self> {
        Self::Constant { gamma }.validated()
    }

    pub fn sine(gamma: f64, nu: f64) -> Result<Self> {
        Self::Sine { gamma, nu }.validated()
    }

    pub fn offset_sine(gamma: f64, gamma0: f64, nu: f64) -> Result<Self> {
        Self::OffsetSine { gamma, gamma0, nu }.validated()
    }

    pub fn sine_sum(gamma: f64, nus: Vec<f64>) -> Result<Self> {
        Self::SineSum { gamma, nus }.validated()
    }

    pub fn nmr(gamma: f64, j: f64, theta: f64) -> Result<Self> {
        Self::Nmr { gamma, j, theta }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite, got {x}")))
            }
        };
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
            }
        };
        match self {
            RateModel::Constant { gamma } => finite("gamma", *gamma),
            RateModel::Sine { gamma, nu } => {
                finite("gamma", *gamma)?;
                positive("nu", *nu)
            }
            RateModel::OffsetSine { gamma, gamma0, nu } => {
                finite("gamma", *gamma)?;
                finite("gamma0", *gamma0)?;
                positive("nu", *nu)
            }
            RateModel::SineSum { gamma, nus } => {
                finite("gamma", *gamma)?;
                if nus.is_empty() {
                    return Err(Error::InvalidParameter("sine sum needs at least one frequency".into()));
                }
                nus.iter().try_for_each(|&nu| positive("nu", nu))
            }
            RateModel::Nmr { gamma, j, theta } => {
                finite("gamma", *gamma)?;
                positive("J", *j)?;
                if !(0.0..=FRAC_PI_2).contains(theta) {
                    return Err(Error::InvalidParameter(format!(
                        "theta must lie in [0, pi/2], got {theta}"
                    )));
                }
                if *theta == FRAC_PI_4 {
                    return Err(Error::InvalidParameter(
                        "theta = pi/4 makes the rate diverge".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Overall magnitude parameter γ shared by every variant.
    pub fn gamma(&self) -> f64 {
        match self {
            RateModel::Constant { gamma }
            | RateModel::Sine { gamma, .. }
            | RateModel::OffsetSine { gamma, .. }
            | RateModel::SineSum { gamma, .. }
            | RateModel::Nmr { gamma, .. } => *gamma,
        }
    }

    /// Copy with γ replaced.
    pub fn with_gamma(&self, value: f64) -> Self {
        let mut model = self.clone();
        match &mut model {
            RateModel::Constant { gamma }
            | RateModel::Sine { gamma, .. }
            | RateModel::OffsetSine { gamma, .. }
            | RateModel::SineSum { gamma, .. }
            | RateModel::Nmr { gamma, .. } => *gamma = value,
        }
        model
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, RateModel::Constant { .. })
    }

    /// Whether the model carries the energy shift term.
    pub fn has_shift(&self) -> bool {
        matches!(self, RateModel::Nmr { .. })
    }

    /// γ(t).
    pub fn rate_at(&self, t: f64) -> Result<f64> {
        Ok(match self {
            RateModel::Constant { gamma } => *gamma,
            RateModel::Sine { gamma, nu } => gamma * libm::sin(nu * t),
            RateModel::OffsetSine { gamma, gamma0, nu } => gamma + gamma0 * libm::sin(nu * t),
            RateModel::SineSum { gamma, nus } => {
                let sum: f64 = nus.iter().map(|nu| libm::sin(nu * t)).sum();
                gamma * sum / nus.len() as f64
            }
            RateModel::Nmr { gamma, j, theta } => {
                let den = nmr_denominator(*j, *theta, t)?;
                let s2 = libm::sin(2.0 * theta);
                gamma + PI * j * s2 * s2 * libm::sin(TAU * j * t) / den
            }
        })
    }

    /// Time-independent part of γ(t): γ for constant, offset-sine and NMR
    /// rates, zero for pure sines.
    pub fn offset(&self) -> f64 {
        match self {
            RateModel::Constant { gamma } | RateModel::OffsetSine { gamma, .. } | RateModel::Nmr { gamma, .. } => *gamma,
            RateModel::Sine { .. } | RateModel::SineSum { .. } => 0.0,
        }
    }

    /// `∫ (γ(s) − offset) ds` over `[t0, t1]`, in closed form.
    pub fn oscillating_integral(&self, t0: f64, t1: f64) -> Result<f64> {
        // ∫ sin(νs) ds over [t0, t1] without cancellation for short spans.
        let sine = |nu: f64| 2.0 * libm::sin(0.5 * nu * (t0 + t1)) * libm::sin(0.5 * nu * (t1 - t0)) / nu;
        Ok(match self {
            RateModel::Constant { .. } => 0.0,
            RateModel::Sine { gamma, nu } => gamma * sine(*nu),
            RateModel::OffsetSine { gamma0, nu, .. } => gamma0 * sine(*nu),
            RateModel::SineSum { gamma, nus } => gamma * nus.iter().map(|&nu| sine(nu)).sum::<f64>() / nus.len() as f64,
            RateModel::Nmr { j, theta, .. } => {
                // The oscillating part is −¼ d/dt ln D(t) with
                // D = 4(1 − sin²2θ sin²πJt) the denominator.
                nmr_denominator(*j, *theta, t0)?;
                nmr_denominator(*j, *theta, t1)?;
                let s2 = libm::sin(2.0 * theta);
                let log_d = |t: f64| {
                    let s = libm::sin(PI * j * t);
                    libm::log1p(-s2 * s2 * s * s)
                };
                -0.25 * (log_d(t1) - log_d(t0))
            }
        })
    }

    /// `∫ γ(s) ds` over `[t0, t1]`, in closed form.
    pub fn integral(&self, t0: f64, t1: f64) -> Result<f64> {
        Ok(self.offset() * (t1 - t0) + self.oscillating_integral(t0, t1)?)
    }

    /// Environment-induced energy shift s(t) of the NMR model,
    /// s(t) = 2πJ cos(2θ) / (3 + 2cos(4θ) sin²(πJt) + cos(2πJt)).
    pub fn shift_at(&self, t: f64) -> Result<f64> {
        match self {
            RateModel::Nmr { j, theta, .. } => {
                let den = nmr_denominator(*j, *theta, t)?;
                Ok(TAU * j * libm::cos(2.0 * theta) / den)
            }
            _ => Err(Error::NoShift),
        }
    }

    /// Fundamental period of γ(t), or `None` for a constant rate or
    /// incommensurate sine frequencies.
    pub fn period(&self) -> Option<f64> {
        match self {
            RateModel::Constant { .. } => None,
            RateModel::Sine { nu, .. } | RateModel::OffsetSine { nu, .. } => Some(TAU / nu),
            RateModel::SineSum { nus, .. } => commensurate_period(nus),
            RateModel::Nmr { j, .. } => Some(1.0 / j),
        }
    }

    /// Upper bound on |γ(t)| over all t.
    pub fn rate_bound(&self) -> f64 {
        match self {
            RateModel::Constant { gamma } | RateModel::Sine { gamma, .. } | RateModel::SineSum { gamma, .. } => {
                libm::fabs(*gamma)
            }
            RateModel::OffsetSine { gamma, gamma0, .. } => libm::fabs(*gamma) + libm::fabs(*gamma0),
            RateModel::Nmr { gamma, j, theta } => {
                // The denominator is 4(1 − sin²2θ sin²πJt) ≥ 4cos²2θ.
                let s2 = libm::sin(2.0 * theta);
                let c2 = libm::cos(2.0 * theta);
                libm::fabs(*gamma) + PI * j * s2 * s2 / (4.0 * c2 * c2)
            }
        }
    }

    /// Upper bound on |s(t)| over all t; zero without a shift.
    pub fn shift_bound(&self) -> f64 {
        match self {
            RateModel::Nmr { j, theta, .. } => PI * j / (2.0 * libm::fabs(libm::cos(2.0 * theta))),
            _ => 0.0,
        }
    }

    /// Largest angular frequency present in γ(t); zero for a constant rate.
    pub fn max_angular_frequency(&self) -> f64 {
        match self {
            RateModel::Constant { .. } => 0.0,
            RateModel::Sine { nu, .. } | RateModel::OffsetSine { nu, .. } => *nu,
            RateModel::SineSum { nus, .. } => nus.iter().copied().fold(0.0, f64::max),
            RateModel::Nmr { j, theta, .. } => {
                // The pulse near t = 1/(2J) narrows like |cos 2θ| as θ → π/4.
                let width = libm::fabs(libm::cos(2.0 * theta)).max(1e-3);
                TAU * j / width
            }
        }
    }
}

fn nmr_denominator(j: f64, theta: f64, t: f64) -> Result<f64> {
    let s = libm::sin(PI * j * t);
    let den = 3.0 + 2.0 * libm::cos(4.0 * theta) * s * s + libm::cos(TAU * j * t);
    if den <= 1e-12 {
        return Err(Error::SingularRate { t });
    }
    Ok(den)
}

/// Common period `2π / gcd(ν)` of commensurate angular frequencies, found by
/// expressing every ν as a fraction with a shared denominator up to 1000.
fn commensurate_period(nus: &[f64]) -> Option<f64> {
    fn gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    'denominators: for q in 1..=1000u64 {
        let mut g = 0u64;
        for &nu in nus {
            let scaled = nu * q as f64;
            let rounded = libm::round(scaled);
            if rounded < 1.0 || libm::fabs(scaled - rounded) > 1e-9 * scaled.max(1.0) {
                continue 'denominators;
            }
            g = gcd(g, rounded as u64);
        }
        return Some(TAU * q as f64 / g as f64);
    }
    None
}
