// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Configuration-driven experiments on top of [`dephase_core`]: JSON
//! configs, parallel parameter sweeps, CSV output and figure summaries.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod figures;
pub mod oracle;
pub mod output;
pub mod summary;
pub mod sweep;

pub use config::{ExperimentConfig, FigureConfig, SweepParameter};
pub use error::{LabError, Result};
pub use summary::{report_figure_summary, SeriesSummary, Verdict};
pub use sweep::{run_sweep, RunOptions, Sweep, SweepRecord};
