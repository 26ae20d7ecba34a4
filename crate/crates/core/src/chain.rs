// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Static description of the chain: site energies, nearest-neighbour
//! couplings and the incoherent injection/extraction ports.
//!
//! All frequencies and rates are in units of the base frequency ω. Site
//! indices are 1-based.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// An incoherent port attached to one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Port {
    /// 1-based site index.
    pub site: usize,
    pub rate: f64,
}

impl Port {
    pub const fn new(site: usize, rate: f64) -> Self {
        Self { site, rate }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    n_sites: usize,
    frequencies: Vec<f64>,
    couplings: Vec<f64>,
    injection: Port,
    extraction: Port,
}

impl ChainSpec {
    pub fn new(
        frequencies: Vec<f64>,
        couplings: Vec<f64>,
        injection: Port,
        extraction: Port,
    ) -> Result<Self> {
        let spec = Self {
            n_sites: frequencies.len(),
            frequencies,
            couplings,
            injection,
            extraction,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Chain with identical site frequencies and identical couplings.
    pub fn uniform(
        n_sites: usize,
        omega: f64,
        lambda: f64,
        injection: Port,
        extraction: Port,
    ) -> Result<Self> {
        Self::new(
            vec![omega; n_sites],
            vec![lambda; n_sites.saturating_sub(1)],
            injection,
            extraction,
        )
    }

    /// The seven-site benchmark chain: ω = 1, λ = 0.1, κ_inj = κ_ext = 0.01,
    /// injection at site 1. Site 5 gives the non-symmetric configuration,
    /// site 7 the symmetric one.
    pub fn benchmark(extraction_site: usize) -> Result<Self> {
        Self::uniform(7, 1.0, 0.1, Port::new(1, 0.01), Port::new(extraction_site, 0.01))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites;
        if n == 0 {
            return Err(Error::InvalidParameter("chain needs at least one site".into()));
        }
        if self.frequencies.len() != n {
            return Err(Error::InvalidParameter(format!(
                "expected {n} frequencies, got {}",
                self.frequencies.len()
            )));
        }
        if self.couplings.len() != n - 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} couplings, got {}",
                n - 1,
                self.couplings.len()
            )));
        }
        if !self.frequencies.iter().chain(&self.couplings).all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite frequency or coupling".into()));
        }
        for (name, port) in [("injection", self.injection), ("extraction", self.extraction)] {
            if !(port.rate.is_finite() && port.rate >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} rate must be finite and non-negative, got {}",
                    port.rate
                )));
            }
            if port.site == 0 || port.site > n {
                return Err(Error::InvalidParameter(format!(
                    "{name} site {} outside 1..={n}",
                    port.site
                )));
            }
        }
        if n == 1 {
            // A single site cannot host distinct ports; only injection is meaningful.
            if self.extraction.rate != 0.0 {
                return Err(Error::InvalidParameter(
                    "a one-site chain cannot have an extraction port".into(),
                ));
            }
        } else if self.extraction.site == self.injection.site {
            return Err(Error::InvalidParameter(
                "extraction and injection must be on different sites".into(),
            ));
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Hilbert-space dimension `2^N`.
    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn injection(&self) -> Port {
        self.injection
    }

    pub fn extraction(&self) -> Port {
        self.extraction
    }

    /// Copy with both port rates replaced.
    pub fn with_port_rates(&self, kappa_inj: f64, kappa_ext: f64) -> Result<Self> {
        let mut spec = self.clone();
        spec.injection.rate = kappa_inj;
        spec.extraction.rate = kappa_ext;
        spec.validate()?;
        Ok(spec)
    }

    /// Copy with the extraction moved to another site.
    pub fn with_extraction_site(&self, site: usize) -> Result<Self> {
        let mut spec = self.clone();
        spec.extraction.site = site;
        spec.validate()?;
        Ok(spec)
    }
}
