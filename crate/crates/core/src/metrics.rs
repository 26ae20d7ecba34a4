// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Figures of merit: exciton current, occupation spread, the
//! non-Markovianity indicator f(t) = max(0, −γ(t)) and its integral, and
//! complete-positivity checks on dephasing rates.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::chain::ChainSpec;
use crate::quadrature::{self, QuadratureConfig};
use crate::rate::RateModel;
use crate::{Error, Result};

/// Running integrals below this count as a complete-positivity violation.
pub const CP_TOL: f64 = -1e-10;

/// Steady-state observables of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSet {
    pub populations: Vec<f64>,
    /// `J = κ_ext · n_k`
    pub current: f64,
    /// `J̃ = J / (κ_ext N) = n_k / N`
    pub rescaled_current: f64,
    pub spread: f64,
}

impl ObservableSet {
    pub fn new(populations: Vec<f64>, spec: &ChainSpec) -> Result<Self> {
        if populations.len() != spec.n_sites() {
            return Err(Error::InvalidParameter("one population per site expected".into()));
        }
        let ext = spec.extraction().site;
        let (current, rescaled_current) = current(populations[ext - 1], spec);
        let spread = spread(&populations, ext)?;
        Ok(Self { populations, current, rescaled_current, spread })
    }
}

/// `(J, J̃)` from the extraction-site population `n_k`.
pub fn current(n_ext: f64, spec: &ChainSpec) -> (f64, f64) {
    let kappa = spec.extraction().rate;
    (kappa * n_ext, n_ext / spec.n_sites() as f64)
}

/// `Δₙ = 1 − (mean(n) − n_k)²` for the 1-based extraction site `k`.
pub fn spread(populations: &[f64], extraction_site: usize) -> Result<f64> {
    if extraction_site == 0 || extraction_site > populations.len() {
        return Err(Error::InvalidParameter("extraction site outside the population vector".into()));
    }
    let mean = populations.iter().sum::<f64>() / populations.len() as f64;
    let d = mean - populations[extraction_site - 1];
    Ok(1.0 - d * d)
}

/// `f(t) = max(0, −γ(t))`.
pub fn nm_indicator(model: &RateModel, t: f64) -> Result<f64> {
    Ok((-model.rate_at(t)?).max(0.0))
}

/// Initial quadrature panels on `[a, b]`: `points_per_period` per period of
/// the fastest component, at least one per unit time.
fn panels(model: &RateModel, a: f64, b: f64, config: &QuadratureConfig) -> usize {
    let omega = model.max_angular_frequency();
    let per_time = (omega / TAU * config.points_per_period as f64).max(1.0);
    libm::ceil((b - a) * per_time).max(1.0) as usize
}

/// `F(t, t′) = ∫ f(s) ds` over `[t, t′]`.
///
/// Sign changes of γ are bracketed on the quadrature grid and refined by
/// bisection; `∫ γ` over the negative stretches is then taken in closed
/// form, which avoids quadrature across the kinks of `f`.
pub fn nm_quantifier(model: &RateModel, t: f64, t_prime: f64, config: &QuadratureConfig) -> Result<f64> {
    if !(t_prime > t) {
        return Err(Error::InvalidParameter("quantifier needs t′ > t".into()));
    }
    let n = panels(model, t, t_prime, config);
    let dt = (t_prime - t) / n as f64;
    let mut cuts = alloc::vec![t];
    let (mut lo, mut g_lo) = (t, model.rate_at(t)?);
    for k in 1..=n {
        let hi = if k == n { t_prime } else { t + k as f64 * dt };
        let g_hi = model.rate_at(hi)?;
        if (g_lo < 0.0) != (g_hi < 0.0) {
            cuts.push(sign_change(model, lo, hi, g_lo < 0.0)?);
        }
        (lo, g_lo) = (hi, g_hi);
    }
    cuts.push(t_prime);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] && model.rate_at(0.5 * (w[0] + w[1]))? < 0.0 {
            total -= model.integral(w[0], w[1])?;
        }
    }
    Ok(total.max(0.0))
}

/// Bisects `[a, b]` down to adjacent floats around the point where
/// `γ < 0` switches from `negative_at_a`.
fn sign_change(model: &RateModel, mut a: f64, mut b: f64, negative_at_a: bool) -> Result<f64> {
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            return Ok(mid);
        }
        if (model.rate_at(mid)? < 0.0) == negative_at_a {
            a = mid;
        } else {
            b = mid;
        }
    }
}

/// Running integral `∫₀ᵗ γ` on a uniform grid over `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CpReport {
    pub times: Vec<f64>,
    pub integrals: Vec<f64>,
    pub valid: bool,
    /// First grid time where the running integral drops below [`CP_TOL`].
    pub first_violation: Option<f64>,
}

/// Checks `∫₀ᵗ γ(s) ds ≥ 0` on a grid with `points_per_period` points per
/// period of the fastest component (and at least 1000 points overall).
pub fn cp_check_single_channel(model: &RateModel, horizon: f64, config: &QuadratureConfig) -> Result<CpReport> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    let n = panels(model, 0.0, horizon, config).max(1000);
    let dt = horizon / n as f64;
    let mut times = Vec::with_capacity(n);
    let mut integrals = Vec::with_capacity(n);
    let mut running = 0.0;
    let mut first_violation = None;
    for k in 0..n {
        let (a, b) = (k as f64 * dt, if k + 1 == n { horizon } else { (k + 1) as f64 * dt });
        running += quadrature::integrate(|s| model.rate_at(s), a, b, 1, config)?.value;
        times.push(b);
        integrals.push(running);
        if first_violation.is_none() && running < CP_TOL {
            first_violation = Some(b);
        }
    }
    Ok(CpReport { times, integrals, valid: first_violation.is_none(), first_violation })
}

/// Outcome of the three-channel Pauli condition at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliReport {
    /// `Γⱼ = exp(−∫₀ᵗ (γ_k + γ_l))`.
    pub gammas: [f64; 3],
    pub valid: bool,
}

/// Slack on `Γⱼ + Γ_k ≤ 1 + Γ_l`. With two vanishing channels the check then
/// accepts exactly the running integrals that [`cp_check_single_channel`]
/// accepts.
pub const PAULI_TOL: f64 = -2.0 * CP_TOL;

/// Checks `Γⱼ + Γ_k ≤ 1 + Γ_l` for all permutations at time `t`.
pub fn cp_check_pauli_channels(rates: [&RateModel; 3], t: f64, config: &QuadratureConfig) -> Result<PauliReport> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter("time must be non-negative".into()));
    }
    let mut integral = [0.0; 3];
    for (i, model) in rates.iter().enumerate() {
        if t > 0.0 {
            let n = panels(model, 0.0, t, config);
            integral[i] = quadrature::integrate(|s| model.rate_at(s), 0.0, t, n, config)?.value;
        }
    }
    let gammas = [
        libm::exp(-(integral[1] + integral[2])),
        libm::exp(-(integral[0] + integral[2])),
        libm::exp(-(integral[0] + integral[1])),
    ];
    let valid = [(0, 1, 2), (0, 2, 1), (1, 2, 0)]
        .iter()
        .all(|&(j, k, l)| gammas[j] + gammas[k] <= 1.0 + gammas[l] + PAULI_TOL);
    Ok(PauliReport { gammas, valid })
}

/// Non-Markovianity summary of a rate model over `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonMarkovReport {
    pub times: Vec<f64>,
    /// `f(t)` on the grid.
    pub indicator: Vec<f64>,
    /// `F(0, horizon)`.
    pub quantifier: f64,
    /// `f = 0` on every grid point.
    pub is_markovian: bool,
    pub cp_valid: bool,
    pub first_cp_violation: Option<f64>,
}

pub fn non_markov_report(model: &RateModel, horizon: f64, config: &QuadratureConfig) -> Result<NonMarkovReport> {
    let cp = cp_check_single_channel(model, horizon, config)?;
    let mut times = Vec::with_capacity(cp.times.len() + 1);
    times.push(0.0);
    times.extend_from_slice(&cp.times);
    let indicator = times.iter().map(|&t| nm_indicator(model, t)).collect::<Result<Vec<_>>>()?;
    let is_markovian = indicator.iter().all(|&f| f == 0.0);
    // F vanishes on a Markovian grid by definition; quadrature would only add
    // round-off from sub-grid excursions.
    let quantifier = if is_markovian { 0.0 } else { nm_quantifier(model, 0.0, horizon, config)? };
    Ok(NonMarkovReport {
        times,
        indicator,
        quantifier,
        is_markovian,
        cp_valid: cp.valid,
        first_cp_violation: cp.first_violation,
    })
}

/// Smallest value of γ(t) over one period, located by grid search with
/// golden-section refinement. Constant models return γ.
pub fn min_rate(model: &RateModel) -> Result<(f64, f64)> {
    let Some(period) = model.period() else {
        return Ok((0.0, model.rate_at(0.0)?));
    };
    let n = panels(model, 0.0, period, &QuadratureConfig::default()).max(2000);
    let dt = period / n as f64;
    let mut best = (0.0, model.rate_at(0.0)?);
    for k in 1..n {
        let t = k as f64 * dt;
        let v = model.rate_at(t)?;
        if v < best.1 {
            best = (t, v);
        }
    }
    let (mut a, mut b) = (best.0 - dt, best.0 + dt);
    let phi = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (model.rate_at(c)?, model.rate_at(d)?);
    while b - a > 1e-12 * period {
        if fc < fd {
            b = d;
            (d, fd) = (c, fc);
            c = b - phi * (b - a);
            fc = model.rate_at(c)?;
        } else {
            a = c;
            (c, fc) = (d, fd);
            d = a + phi * (b - a);
            fd = model.rate_at(d)?;
        }
    }
    let t = 0.5 * (a + b);
    let v = model.rate_at(t)?;
    Ok(if v < best.1 { (t, v) } else { best })
}

/// Offset γ above which an additive-offset model (constant, offset-sine,
/// NMR) has γ(t) ≥ 0 for all t: `−min_t γ_osc(t)`, with `γ_osc` the rate at
/// zero offset. `None` for purely multiplicative models.
pub fn markovian_crossover(model: &RateModel) -> Result<Option<f64>> {
    match model {
        RateModel::Sine { .. } | RateModel::SineSum { .. } => Ok(None),
        _ => Ok(Some(-min_rate(&model.with_gamma(0.0))?.1)),
    }
}
