// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Cross-check of time-integrated steady states against the algebraic
//! null-space solution on small chains.

use dephase_core::evolution::{find_steady_state, steady_state_nullspace, IntegratorConfig};
use dephase_core::{ChainSpec, GeneratorContext, Port, RateModel};
use serde::Serialize;

use crate::error::Result;

/// Largest accepted trace distance between the two steady states.
pub const ORACLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleRow {
    pub n_sites: usize,
    pub extraction_site: usize,
    pub gamma: f64,
    pub trace_distance: f64,
    pub converged: bool,
}

impl OracleRow {
    pub fn passed(&self) -> bool {
        self.converged && self.trace_distance <= ORACLE_TOL
    }
}

/// Extraction away from the far end where the chain allows it.
pub fn oracle_extraction_site(n_sites: usize) -> usize {
    if n_sites >= 3 { n_sites - 1 } else { n_sites }
}

pub fn oracle_row(n_sites: usize, gamma: f64, config: &IntegratorConfig) -> Result<OracleRow> {
    let site = oracle_extraction_site(n_sites);
    let spec = ChainSpec::uniform(n_sites, 1.0, 0.1, Port::new(1, 0.01), Port::new(site, 0.01))?;
    let ctx = GeneratorContext::new(spec, RateModel::constant(gamma)?)?;
    let integrated = find_steady_state(&ctx, config)?;
    let exact = steady_state_nullspace(&ctx, gamma)?;
    Ok(OracleRow {
        n_sites,
        extraction_site: site,
        gamma,
        trace_distance: integrated.state.trace_distance(&exact),
        converged: integrated.converged,
    })
}

pub fn oracle_table(sizes: &[usize], gammas: &[f64], config: &IntegratorConfig) -> Result<Vec<OracleRow>> {
    let mut rows = Vec::new();
    for &n in sizes {
        for &g in gammas {
            rows.push(oracle_row(n, g, config)?);
        }
    }
    Ok(rows)
}
