// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Shape classification of swept curves.

use serde::{Deserialize, Serialize};

use crate::config::SweepParameter;
use crate::sweep::{Sweep, SweepRecord};

/// Comparison band for successive values.
pub const SHAPE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// All values within the band of each other.
    Constant,
    /// Non-decreasing.
    Increasing,
    /// Non-increasing.
    Decreasing,
    /// Rises, then falls.
    InteriorMax,
    /// Falls, then rises.
    InteriorMin,
    NonMonotonic,
    /// Fewer than two converged points.
    Undetermined,
}

/// Classifies `values` by the signs of successive differences, treating
/// differences within [`SHAPE_TOL`] as flat.
pub fn classify(values: &[f64]) -> Verdict {
    if values.len() < 2 {
        return Verdict::Undetermined;
    }
    let signs: Vec<i8> = values
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            if d > SHAPE_TOL {
                1
            } else if d < -SHAPE_TOL {
                -1
            } else {
                0
            }
        })
        .filter(|&s| s != 0)
        .collect();
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    match (signs.first(), changes) {
        (None, _) => Verdict::Constant,
        (Some(1), 0) => Verdict::Increasing,
        (Some(_), 0) => Verdict::Decreasing,
        (Some(1), 1) => Verdict::InteriorMax,
        (Some(_), 1) => Verdict::InteriorMin,
        _ => Verdict::NonMonotonic,
    }
}

/// Index of the first maximum; NaN entries are skipped.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if best.map_or(true, |b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub label: String,
    pub parameter: SweepParameter,
    pub points: usize,
    pub converged_points: usize,
    /// Points without a bounded periodic state.
    pub diverged_points: usize,
    /// Location of the largest J̃ among converged points.
    pub argmax: Option<f64>,
    pub max: Option<f64>,
    /// Shape of J̃ over the converged points.
    pub verdict: Verdict,
    /// Location of the largest Δₙ among converged points.
    pub spread_argmax: Option<f64>,
    /// Offset above which the rate is non-negative at all times, when the
    /// swept parameter is that offset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub markovian_crossover: Option<f64>,
}

/// Summary over the converged records of one curve.
pub fn report_figure_summary(
    label: &str,
    parameter: SweepParameter,
    records: &[SweepRecord],
    markovian_crossover: Option<f64>,
) -> SeriesSummary {
    let good: Vec<&SweepRecord> = records.iter().filter(|r| r.converged).collect();
    let current: Vec<f64> = good.iter().map(|r| r.rescaled_current).collect();
    let spread: Vec<f64> = good.iter().map(|r| r.spread).collect();
    let top = argmax(&current);
    SeriesSummary {
        label: label.to_string(),
        parameter,
        points: records.len(),
        converged_points: good.len(),
        diverged_points: records.iter().filter(|r| r.diverged).count(),
        argmax: top.map(|i| good[i].parameter),
        max: top.map(|i| current[i]),
        verdict: classify(&current),
        spread_argmax: argmax(&spread).map(|i| good[i].parameter),
        markovian_crossover,
    }
}

/// Summary of a finished sweep, with the crossover marker for offset
/// sweeps of models that can turn negative.
pub fn summarize(sweep: &Sweep) -> SeriesSummary {
    let config = &sweep.config;
    let crossover = if config.sweep.parameter == SweepParameter::Gamma {
        config
            .rate
            .build()
            .ok()
            .and_then(|m| dephase_core::metrics::markovian_crossover(&m).ok().flatten())
            .filter(|&c| c > 0.0)
    } else {
        None
    };
    report_figure_summary(&config.label, config.sweep.parameter, &sweep.records, crossover)
}
