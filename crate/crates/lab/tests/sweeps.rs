// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

use dephase::output::write_csv;
use dephase::{run_sweep, ExperimentConfig, RunOptions};

const SINE: &str = r#"{
    "label": "small_sine",
    "chain": { "n_sites": 3, "extraction": { "site": 2, "rate": 0.05 }, "injection": { "site": 1, "rate": 0.05 } },
    "rate": { "model": "sine", "nu": 2 },
    "sweep": { "parameter": "gamma", "min": 0, "max": 0.6, "points": 4 },
    "integrator": { "enforce_positivity": false }
}"#;

fn csv(threads: usize) -> Vec<u8> {
    let config = ExperimentConfig::from_json(SINE).unwrap();
    let sweep = run_sweep(&config, &RunOptions { threads: Some(threads), ..RunOptions::default() }).unwrap();
    assert!(sweep.all_converged());
    let params: Vec<f64> = sweep.records.iter().map(|r| r.parameter).collect();
    assert_eq!(params, config.sweep.grid());
    let mut out = Vec::new();
    write_csv(&sweep.records, 3, &mut out).unwrap();
    out
}

#[test]
fn reruns_are_byte_identical() {
    assert_eq!(csv(1), csv(1));
}

#[test]
fn worker_count_does_not_change_the_output() {
    let sequential = csv(1);
    assert_eq!(csv(3), sequential);
    let text = String::from_utf8(sequential).unwrap();
    assert!(text.starts_with("parameter,j_tilde,delta_n,n_1,n_2,n_3,converged,periods,F\n"), "{text}");
    assert_eq!(text.lines().count(), 5);
}
