// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

use dephase::config::SweepBlock;
use dephase::output::write_csv;
use dephase::summary::{argmax, classify};
use dephase::{SweepParameter, SweepRecord, Verdict};
use dephase_core::evolution::InvariantLog;
use proptest::prelude::*;

fn record(parameter: f64, current: f64) -> SweepRecord {
    SweepRecord {
        parameter,
        rescaled_current: current,
        spread: 1.0 - current,
        populations: vec![current; 3],
        converged: true,
        diverged: false,
        periods: 3,
        nm_quantifier: 0.0,
        floquet_radius: 0.5,
        invariants: InvariantLog::default(),
        error: None,
    }
}

proptest! {
    #[test]
    fn grid_is_increasing_with_exact_ends(min in -5.0..5.0, width in 1e-3..10.0, points in 2usize..200) {
        let sweep = SweepBlock { parameter: SweepParameter::Gamma, min, max: min + width, points };
        prop_assert!(sweep.validate().is_ok());
        let grid = sweep.grid();
        prop_assert_eq!(grid.len(), points);
        prop_assert_eq!(grid[0], min);
        prop_assert_eq!(*grid.last().unwrap(), min + width);
        prop_assert!(grid.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn decreasing_columns_are_classified_decreasing(
        start in -1.0..1.0,
        drops in prop::collection::vec(1e-6..1.0, 1..40),
    ) {
        let values: Vec<f64> = drops.iter().scan(start, |v, d| { *v -= d; Some(*v) }).collect();
        let mut column = vec![start];
        column.extend(values);
        prop_assert_eq!(classify(&column), Verdict::Decreasing);
        prop_assert_eq!(argmax(&column), Some(0));
    }

    #[test]
    fn single_peak_is_located(
        rises in prop::collection::vec(1e-6..1.0, 1..20),
        falls in prop::collection::vec(1e-6..1.0, 1..20),
    ) {
        let mut column = vec![0.0];
        for r in &rises {
            column.push(column.last().unwrap() + r);
        }
        for f in &falls {
            column.push(column.last().unwrap() - f);
        }
        prop_assert_eq!(classify(&column), Verdict::InteriorMax);
        prop_assert_eq!(argmax(&column), Some(rises.len()));
    }

    #[test]
    fn csv_has_one_row_per_record(currents in prop::collection::vec(0.0..0.2, 1..30)) {
        let records: Vec<_> = currents.iter().enumerate().map(|(k, &c)| record(k as f64 * 0.1, c)).collect();
        let mut out = Vec::new();
        write_csv(&records, 3, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        prop_assert_eq!(text.lines().count(), records.len() + 1);
        for (line, r) in text.lines().skip(1).zip(&records) {
            let first: f64 = line.split(',').next().unwrap().parse().unwrap();
            prop_assert_eq!(first, r.parameter);
            let second: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            prop_assert_eq!(second, r.rescaled_current);
        }
    }
}
