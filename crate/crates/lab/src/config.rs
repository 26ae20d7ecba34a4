// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "label": "sine_0.3",
//!   "chain": { "n_sites": 7, "extraction": { "site": 5, "rate": 0.01 } },
//!   "rate": { "model": "sine", "nu": 0.3 },
//!   "sweep": { "parameter": "gamma", "min": 0.0, "max": 2.0, "points": 25 }
//! }
//! ```
//!
//! Omitted chain fields default to ω = 1, λ = 0.1 and injection at site 1
//! with rate 0.01. Omitted integrator fields keep the library defaults.

use std::path::{Path, PathBuf};

use dephase_core::evolution::IntegratorConfig;
use dephase_core::{ChainSpec, Port, RateModel};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortBlock {
    pub site: usize,
    pub rate: f64,
}

fn default_n_sites() -> usize {
    7
}

fn default_injection() -> PortBlock {
    PortBlock { site: 1, rate: 0.01 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainBlock {
    #[serde(default = "default_n_sites")]
    pub n_sites: usize,
    /// Uniform site frequency, unless `frequencies` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<f64>>,
    /// Uniform coupling, unless `couplings` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
    #[serde(default = "default_injection")]
    pub injection: PortBlock,
    pub extraction: PortBlock,
}

impl ChainBlock {
    pub fn build(&self) -> Result<ChainSpec> {
        let n = self.n_sites;
        let frequencies = match (&self.frequencies, self.omega) {
            (Some(_), Some(_)) => return Err(LabError::Config("give either omega or frequencies".into())),
            (Some(f), None) => f.clone(),
            (None, w) => vec![w.unwrap_or(1.0); n],
        };
        let couplings = match (&self.couplings, self.lambda) {
            (Some(_), Some(_)) => return Err(LabError::Config("give either lambda or couplings".into())),
            (Some(c), None) => c.clone(),
            (None, l) => vec![l.unwrap_or(0.1); n.saturating_sub(1)],
        };
        if frequencies.len() != n {
            return Err(LabError::Config(format!("expected {n} frequencies, got {}", frequencies.len())));
        }
        Ok(ChainSpec::new(
            frequencies,
            couplings,
            Port::new(self.injection.site, self.injection.rate),
            Port::new(self.extraction.site, self.extraction.rate),
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateBlock {
    Constant {
        #[serde(default)]
        gamma: f64,
    },
    Sine {
        #[serde(default)]
        gamma: f64,
        nu: f64,
    },
    OffsetSine {
        #[serde(default)]
        gamma: f64,
        gamma0: f64,
        nu: f64,
    },
    SineSum {
        #[serde(default)]
        gamma: f64,
        nus: Vec<f64>,
    },
    Nmr {
        #[serde(default)]
        gamma: f64,
        j: f64,
        theta: f64,
    },
}

impl RateBlock {
    pub fn build(&self) -> Result<RateModel> {
        Ok(match self {
            RateBlock::Constant { gamma } => RateModel::constant(*gamma)?,
            RateBlock::Sine { gamma, nu } => RateModel::sine(*gamma, *nu)?,
            RateBlock::OffsetSine { gamma, gamma0, nu } => RateModel::offset_sine(*gamma, *gamma0, *nu)?,
            RateBlock::SineSum { gamma, nus } => RateModel::sine_sum(*gamma, nus.clone())?,
            RateBlock::Nmr { gamma, j, theta } => RateModel::nmr(*gamma, *j, *theta)?,
        })
    }

    /// Copy with the swept parameter set to `value`.
    pub fn with_parameter(&self, parameter: SweepParameter, value: f64) -> Result<Self> {
        let mut block = self.clone();
        match (&mut block, parameter) {
            (
                RateBlock::Constant { gamma }
                | RateBlock::Sine { gamma, .. }
                | RateBlock::OffsetSine { gamma, .. }
                | RateBlock::SineSum { gamma, .. }
                | RateBlock::Nmr { gamma, .. },
                SweepParameter::Gamma,
            ) => *gamma = value,
            (RateBlock::Nmr { theta, .. }, SweepParameter::Theta) => *theta = value,
            (RateBlock::Sine { nu, .. } | RateBlock::OffsetSine { nu, .. }, SweepParameter::Nu) => *nu = value,
            (_, p) => {
                return Err(LabError::Config(format!("parameter {p:?} cannot be swept for this rate model")));
            }
        }
        Ok(block)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Gamma,
    Theta,
    Nu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub parameter: SweepParameter,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl SweepBlock {
    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(LabError::Config("sweep bounds must be finite".into()));
        }
        if self.points < 2 {
            return Err(LabError::Config("a sweep needs at least 2 points".into()));
        }
        if !(self.max > self.min) {
            return Err(LabError::Config("sweep max must exceed min".into()));
        }
        Ok(())
    }

    pub fn parameter_name(&self) -> &'static str {
        match self.parameter {
            SweepParameter::Gamma => "gamma",
            SweepParameter::Theta => "theta",
            SweepParameter::Nu => "nu",
        }
    }

    /// Linearly spaced grid including both ends.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n)
            .map(|k| if k == n { self.max } else { self.min + (self.max - self.min) * k as f64 / n as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accelerate: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enforce_positivity: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_dephasing: Option<bool>,
}

impl IntegratorBlock {
    pub fn build(&self) -> Result<IntegratorConfig> {
        let d = IntegratorConfig::default();
        let config = IntegratorConfig {
            rtol: self.rtol.unwrap_or(d.rtol),
            atol: self.atol.unwrap_or(d.atol),
            initial_step: self.initial_step.unwrap_or(d.initial_step),
            max_step: self.max_step.unwrap_or(d.max_step),
            t_max: self.t_max.unwrap_or(d.t_max),
            probe_window: self.probe_window.unwrap_or(d.probe_window),
            steady_tol: self.steady_tol.unwrap_or(d.steady_tol),
            window_phase: self.window_phase.unwrap_or(d.window_phase),
            accelerate: self.accelerate.unwrap_or(d.accelerate),
            enforce_positivity: self.enforce_positivity.unwrap_or(d.enforce_positivity),
            exact_dephasing: self.exact_dephasing.unwrap_or(d.exact_dephasing),
        };
        config.validate()?;
        Ok(config)
    }
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

/// One swept curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub label: String,
    pub chain: ChainBlock,
    pub rate: RateBlock,
    pub sweep: SweepBlock,
    #[serde(default)]
    pub integrator: IntegratorBlock,
    /// CSV destination, relative to the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn check_schema(version: u32) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(LabError::Config(format!(
            "unsupported schema_version {version} (expected {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version)?;
        if self.label.is_empty() {
            return Err(LabError::Config("label must not be empty".into()));
        }
        self.chain.build()?;
        self.sweep.validate()?;
        self.integrator.build()?;
        for value in [self.sweep.min, self.sweep.max] {
            self.rate.with_parameter(self.sweep.parameter, value)?.build()?;
        }
        Ok(())
    }
}

/// Time series of γ(t) for a family of models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateCurvesBlock {
    pub rate: RateBlock,
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub t_end: f64,
    pub points: usize,
}

/// A bundle of curves making up one figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub figure: u32,
    pub title: String,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default)]
    pub series: Vec<ExperimentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_curves: Option<RateCurvesBlock>,
}

impl FigureConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        check_schema(config.schema_version)?;
        for series in &config.series {
            series.validate()?;
        }
        if let Some(curves) = &config.rate_curves {
            if curves.points < 2 || !(curves.t_end > 0.0) {
                return Err(LabError::Config("rate curves need t_end > 0 and at least 2 points".into()));
            }
            for &v in &curves.values {
                curves.rate.with_parameter(curves.parameter, v)?.build()?;
            }
        }
        Ok(config)
    }
}
