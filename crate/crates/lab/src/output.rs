// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV export of sweep records.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::sweep::SweepRecord;

/// `parameter, j_tilde, delta_n, n_1 … n_N, converged, periods, F`
pub fn header(n_sites: usize) -> Vec<String> {
    let mut h = vec!["parameter".to_string(), "j_tilde".into(), "delta_n".into()];
    h.extend((1..=n_sites).map(|i| format!("n_{i}")));
    h.extend(["converged".to_string(), "periods".into(), "F".into()]);
    h
}

/// Floats use the shortest representation that round-trips, so output is
/// byte-stable across runs.
pub fn write_csv<W: Write>(records: &[SweepRecord], n_sites: usize, writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(header(n_sites))?;
    for r in records {
        let mut row = vec![r.parameter.to_string(), r.rescaled_current.to_string(), r.spread.to_string()];
        row.extend(r.populations.iter().map(f64::to_string));
        row.extend([r.converged.to_string(), r.periods.to_string(), r.nm_quantifier.to_string()]);
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_csv_file(records: &[SweepRecord], n_sites: usize, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_csv(records, n_sites, std::fs::File::create(path)?)
}

/// Writes `t, value_1, …` rows for a family of rate curves.
pub fn write_curves<W: Write>(labels: &[String], times: &[f64], columns: &[Vec<f64>], writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let mut head = vec!["t".to_string()];
    head.extend(labels.iter().cloned());
    csv.write_record(&head)?;
    for (k, t) in times.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(columns.iter().map(|c| c[k].to_string()));
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}
