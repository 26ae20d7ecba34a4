// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{label}: rate model at parameter {parameter} violates complete positivity (running integral < 0 at t = {t})")]
    CpViolation { label: String, parameter: f64, t: f64 },
    #[error(transparent)]
    Core(#[from] dephase_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
