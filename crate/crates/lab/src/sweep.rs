// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Parameter sweeps over steady states.

use dephase_core::evolution::{self, find_steady_state, InvariantLog, IntegratorConfig};
use dephase_core::metrics::{self, ObservableSet};
use dephase_core::quadrature::QuadratureConfig;
use dephase_core::{ChainSpec, GeneratorContext, RateModel};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};

/// Steady-state observables at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub parameter: f64,
    /// `J̃ = n_ext / N`, averaged over the last window.
    pub rescaled_current: f64,
    /// `Δₙ`
    pub spread: f64,
    pub populations: Vec<f64>,
    pub converged: bool,
    /// No bounded periodic state exists; observables are NaN.
    pub diverged: bool,
    pub periods: usize,
    /// `F` over one averaging window.
    pub nm_quantifier: f64,
    pub floquet_radius: f64,
    pub invariants: InvariantLog,
    /// Integration aborted (invariant violation, step underflow).
    pub error: Option<String>,
}

impl SweepRecord {
    fn failed(parameter: f64, n_sites: usize, nm_quantifier: f64) -> Self {
        Self {
            parameter,
            rescaled_current: f64::NAN,
            spread: f64::NAN,
            populations: vec![f64::NAN; n_sites],
            converged: false,
            diverged: false,
            periods: 0,
            nm_quantifier,
            floquet_radius: f64::NAN,
            invariants: InvariantLog::default(),
            error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub config: ExperimentConfig,
    pub records: Vec<SweepRecord>,
}

impl Sweep {
    pub fn all_converged(&self) -> bool {
        self.records.iter().all(|r| r.converged)
    }
}

/// Overrides applied on top of a config, typically from the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
    pub t_max: Option<f64>,
    pub rtol: Option<f64>,
}

impl RunOptions {
    fn integrator(&self, config: &ExperimentConfig) -> Result<IntegratorConfig> {
        let mut integrator = config.integrator.build()?;
        if let Some(t) = self.t_max {
            integrator.t_max = t;
        }
        if let Some(r) = self.rtol {
            integrator.rtol = r;
        }
        integrator.validate()?;
        Ok(integrator)
    }
}

/// Horizon over which complete positivity is checked. A periodic rate with
/// a non-negative running integral over two periods keeps it for all t:
/// `∫₀ᵗ = k ∫₀ᴾ + ∫₀^{t−kP}` and both terms are non-negative.
pub fn cp_horizon(model: &RateModel, integrator: &IntegratorConfig) -> f64 {
    match model.period() {
        Some(p) => 2.0 * p,
        None if model.is_constant() => integrator.probe_window,
        None => integrator.t_max.min(1e4),
    }
}

/// Runs the complete-positivity check for every grid point.
pub fn validate_cp(config: &ExperimentConfig, options: &RunOptions) -> Result<()> {
    let integrator = options.integrator(config)?;
    let quad = QuadratureConfig::default();
    for value in config.sweep.grid() {
        let model = config.rate.with_parameter(config.sweep.parameter, value)?.build()?;
        let report = metrics::cp_check_single_channel(&model, cp_horizon(&model, &integrator), &quad)?;
        if let Some(t) = report.first_violation {
            return Err(LabError::CpViolation { label: config.label.clone(), parameter: value, t });
        }
    }
    Ok(())
}

fn run_point(spec: &ChainSpec, model: RateModel, parameter: f64, integrator: &IntegratorConfig) -> Result<SweepRecord> {
    let ctx = GeneratorContext::new(spec.clone(), model)?;
    let window = evolution::averaging_window(&ctx, integrator);
    let nm = metrics::nm_quantifier(ctx.rate(), 0.0, window, &QuadratureConfig::default())?;
    let n = spec.n_sites();
    let result = match find_steady_state(&ctx, integrator) {
        Ok(r) => r,
        Err(e) => {
            let mut record = SweepRecord::failed(parameter, n, nm);
            record.error = Some(e.to_string());
            return Ok(record);
        }
    };
    let mut record = SweepRecord::failed(parameter, n, nm);
    record.converged = result.converged;
    record.diverged = result.diverged;
    record.periods = result.periods;
    record.floquet_radius = result.floquet_radius;
    record.invariants = result.invariants;
    if !result.diverged {
        let obs = ObservableSet::new(result.populations, spec)?;
        record.rescaled_current = obs.rescaled_current;
        record.spread = obs.spread;
        record.populations = obs.populations;
    }
    Ok(record)
}

/// Steady state at every grid point, in grid order.
///
/// Points are independent and run on a pool of `options.threads` workers;
/// the output does not depend on the pool size. Non-convergence is recorded
/// per point. A rate model that fails the complete-positivity check aborts
/// the sweep before any integration.
pub fn run_sweep(config: &ExperimentConfig, options: &RunOptions) -> Result<Sweep> {
    config.validate()?;
    validate_cp(config, options)?;
    let integrator = options.integrator(config)?;
    let spec = config.chain.build()?;
    let points = config
        .sweep
        .grid()
        .into_iter()
        .map(|v| Ok((v, config.rate.with_parameter(config.sweep.parameter, v)?.build()?)))
        .collect::<Result<Vec<_>>>()?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = options.threads {
        builder = builder.num_threads(k.max(1));
    }
    let pool = builder.build()?;
    let records = pool.install(|| {
        points
            .into_par_iter()
            .map(|(v, model)| run_point(&spec, model, v, &integrator))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(Sweep { config: config.clone(), records })
}
