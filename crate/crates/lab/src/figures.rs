// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Bundled figure configurations and the figure runner.

use std::path::Path;

use serde::Serialize;

use crate::config::FigureConfig;
use crate::error::{LabError, Result};
use crate::output;
use crate::summary::{self, SeriesSummary};
use crate::sweep::{self, RunOptions, Sweep};

const BUNDLED: [&str; 8] = [
    include_str!("../configs/figure1.json"),
    include_str!("../configs/figure2.json"),
    include_str!("../configs/figure3.json"),
    include_str!("../configs/figure4.json"),
    include_str!("../configs/figure5.json"),
    include_str!("../configs/figure6.json"),
    include_str!("../configs/figure7.json"),
    include_str!("../configs/figure8.json"),
];

pub fn figure_numbers() -> std::ops::RangeInclusive<u32> {
    1..=BUNDLED.len() as u32
}

pub fn bundled(figure: u32) -> Result<FigureConfig> {
    let text = figure
        .checked_sub(1)
        .and_then(|i| BUNDLED.get(i as usize))
        .ok_or_else(|| LabError::Config(format!("no bundled config for figure {figure}")))?;
    FigureConfig::from_json(text)
}

#[derive(Debug, Clone, Serialize)]
pub struct FigureSummary {
    pub figure: u32,
    pub title: String,
    pub series: Vec<SeriesSummary>,
}

#[derive(Debug, Clone)]
pub struct FigureRun {
    pub sweeps: Vec<Sweep>,
    pub summary: FigureSummary,
}

impl FigureRun {
    pub fn all_converged(&self) -> bool {
        self.sweeps.iter().all(Sweep::all_converged)
    }
}

/// Writes `γ(t)` for every parameter value of the curve block.
fn write_rate_curves(config: &FigureConfig, out_dir: &Path) -> Result<()> {
    let Some(curves) = &config.rate_curves else {
        return Ok(());
    };
    let n = curves.points - 1;
    let times: Vec<f64> = (0..=n).map(|k| curves.t_end * k as f64 / n as f64).collect();
    let mut labels = Vec::new();
    let mut columns = Vec::new();
    for &v in &curves.values {
        let model = curves.rate.with_parameter(curves.parameter, v)?.build()?;
        labels.push(format!("{:?}={v}", curves.parameter).to_lowercase());
        columns.push(times.iter().map(|&t| model.rate_at(t)).collect::<Result<Vec<_>, _>>()?);
    }
    let file = std::fs::File::create(out_dir.join(format!("figure{}_rates.csv", config.figure)))?;
    output::write_curves(&labels, &times, &columns, file)
}

/// Runs every series of the figure, writing `<label>.csv` for each and
/// `summary.json` into `out_dir`.
pub fn run_figure(config: &FigureConfig, out_dir: &Path, options: &RunOptions) -> Result<FigureRun> {
    std::fs::create_dir_all(out_dir)?;
    write_rate_curves(config, out_dir)?;
    let mut sweeps = Vec::new();
    let mut series = Vec::new();
    for experiment in &config.series {
        let sweep = sweep::run_sweep(experiment, options)?;
        output::write_csv_file(&sweep.records, experiment.chain.n_sites, &out_dir.join(format!("{}.csv", experiment.label)))?;
        series.push(summary::summarize(&sweep));
        sweeps.push(sweep);
    }
    let summary = FigureSummary { figure: config.figure, title: config.title.clone(), series };
    std::fs::write(out_dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(FigureRun { sweeps, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_config_validates() {
        for n in figure_numbers() {
            let fig = bundled(n).unwrap();
            assert_eq!(fig.figure, n);
            assert!(!fig.series.is_empty() || fig.rate_curves.is_some());
            for s in &fig.series {
                assert_eq!(s.sweep.points, 25);
                assert_eq!(s.chain.n_sites, 7);
            }
        }
        assert!(bundled(0).is_err());
        assert!(bundled(9).is_err());
    }

    #[test]
    fn rate_curves_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let run = run_figure(&bundled(8).unwrap(), dir.path(), &RunOptions::default()).unwrap();
        assert!(run.sweeps.is_empty());
        let text = std::fs::read_to_string(dir.path().join("figure8_rates.csv")).unwrap();
        assert_eq!(text.lines().count(), 402);
        assert!(text.starts_with("t,theta=0.1,"));
    }
}
