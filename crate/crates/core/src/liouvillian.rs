// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Right-hand side of the chain master equation
//!
//! ```text
//! dρ/dt = −i[H, ρ] + Σᵢ (γ(t)/2)(σᵢᶻ ρ σᵢᶻ − ρ) − i s(t) Σᵢ [σᵢᶻ, ρ]
//!         + L_inj ρ + L_ext ρ
//! ```
//!
//! with `L_inj` a `σ⁺` channel on the injection site and `L_ext` a `σ⁻`
//! channel on the extraction site. The shift term is present only for the
//! NMR rate model. Negative γ(t) is applied as is.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::chain::ChainSpec;
use crate::density::DensityMatrix;
use crate::operators::{build_hamiltonian, build_operators, SiteOperatorSet, SparseOp};
use crate::rate::RateModel;
use crate::{Error, Result, C64};

/// Largest chain for which the vectorised superoperator is built.
pub const SUPEROPERATOR_SITE_CAP: usize = 7;

const I: C64 = C64::new(0.0, 1.0);

/// Lindblad channel `rate · (A ρ A† − ½{A†A, ρ})`.
#[derive(Debug, Clone)]
pub struct Channel {
    pub rate: f64,
    pub jump: SparseOp,
    pub jump_adj: SparseOp,
    /// `A†A`.
    pub loss: SparseOp,
}

impl Channel {
    fn new(rate: f64, jump: SparseOp) -> Self {
        let jump_adj = jump.adjoint();
        let loss = jump_adj.mul(&jump);
        Self { rate, jump, jump_adj, loss }
    }

    /// `out += rate · (A ρ A† − ½{A†A, ρ})`.
    pub fn apply_acc(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        if self.rate == 0.0 {
            return;
        }
        let k = C64::from(self.rate);
        self.jump.sandwich_acc(rho, &self.jump_adj, k, out);
        self.loss.mul_left_acc(rho, -0.5 * k, out);
        self.loss.mul_right_acc(rho, -0.5 * k, out);
    }
}

/// Everything needed to evaluate the generator at any time.
#[derive(Debug, Clone)]
pub struct GeneratorContext {
    spec: ChainSpec,
    ops: SiteOperatorSet,
    hamiltonian: SparseOp,
    rate: RateModel,
    shift: bool,
    injection: Channel,
    extraction: Channel,
}

impl GeneratorContext {
    /// Builds operators and Hamiltonian for `spec`; the shift term is enabled
    /// for the NMR model.
    pub fn new(spec: ChainSpec, rate: RateModel) -> Result<Self> {
        let ops = build_operators(&spec)?;
        let hamiltonian = build_hamiltonian(&spec, &ops)?;
        let shift = rate.has_shift();
        Self::from_parts(spec, ops, hamiltonian, rate, shift)
    }

    pub fn from_parts(
        spec: ChainSpec,
        ops: SiteOperatorSet,
        hamiltonian: SparseOp,
        rate: RateModel,
        shift: bool,
    ) -> Result<Self> {
        spec.validate()?;
        rate.validate()?;
        if ops.n_sites() != spec.n_sites() || hamiltonian.dim() != spec.dim() {
            return Err(Error::InvalidParameter("inconsistent generator dimensions".into()));
        }
        if shift && !rate.has_shift() {
            return Err(Error::NoShift);
        }
        let inj = spec.injection();
        let ext = spec.extraction();
        let injection = Channel::new(inj.rate, ops.sigma_plus(inj.site).clone());
        let extraction = Channel::new(ext.rate, ops.sigma_minus(ext.site).clone());
        Ok(Self { spec, ops, hamiltonian, rate, shift, injection, extraction })
    }

    /// Same chain and operators with another rate model.
    pub fn with_rate(&self, rate: RateModel) -> Result<Self> {
        let shift = rate.has_shift();
        Self::from_parts(self.spec.clone(), self.ops.clone(), self.hamiltonian.clone(), rate, shift)
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn operators(&self) -> &SiteOperatorSet {
        &self.ops
    }

    pub fn hamiltonian(&self) -> &SparseOp {
        &self.hamiltonian
    }

    pub fn rate(&self) -> &RateModel {
        &self.rate
    }

    pub fn has_shift(&self) -> bool {
        self.shift
    }

    pub fn injection(&self) -> &Channel {
        &self.injection
    }

    pub fn extraction(&self) -> &Channel {
        &self.extraction
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// `(γ(t), s(t))`, with `s = 0` when the shift is disabled.
    pub fn coefficients_at(&self, t: f64) -> Result<(f64, f64)> {
        let gamma = self.rate.rate_at(t)?;
        let shift = if self.shift { self.rate.shift_at(t)? } else { 0.0 };
        Ok((gamma, shift))
    }

    /// dρ/dt at time `t`.
    pub fn apply_rhs(&self, rho: &DensityMatrix, t: f64) -> Result<DMatrix<C64>> {
        let (gamma, shift) = self.coefficients_at(t)?;
        Ok(self.apply_frozen(rho.matrix(), gamma, shift))
    }

    /// Generator with γ and s frozen at the given values, applied to any
    /// square matrix of the right dimension.
    pub fn apply_frozen(&self, rho: &DMatrix<C64>, gamma: f64, shift: f64) -> DMatrix<C64> {
        let d = self.dim();
        assert_eq!(rho.shape(), (d, d), "state has the wrong dimension");
        let mut out = DMatrix::zeros(d, d);
        self.hamiltonian.mul_left_acc(rho, -I, &mut out);
        self.hamiltonian.mul_right_acc(rho, I, &mut out);
        if gamma != 0.0 {
            let half = C64::from(0.5 * gamma);
            for site in 1..=self.spec.n_sites() {
                let z = self.ops.sigma_z(site);
                z.sandwich_acc(rho, z, half, &mut out);
            }
            out -= rho * (half * self.spec.n_sites() as f64);
        }
        if shift != 0.0 {
            let s = C64::from(shift);
            for site in 1..=self.spec.n_sites() {
                let z = self.ops.sigma_z(site);
                z.mul_left_acc(rho, -I * s, &mut out);
                z.mul_right_acc(rho, I * s, &mut out);
            }
        }
        self.injection.apply_acc(rho, &mut out);
        self.extraction.apply_acc(rho, &mut out);
        out
    }

    /// `L_inj ρ` alone.
    pub fn injection_term(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
        self.injection.apply_acc(rho, &mut out);
        out
    }

    /// `L_ext ρ` alone.
    pub fn extraction_term(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
        self.extraction.apply_acc(rho, &mut out);
        out
    }
}

/// Generator acting on column-stacked `vec(ρ)`, where entry `ρ[r, c]` sits at
/// index `c·d + r`.
#[derive(Debug, Clone)]
pub struct SuperOperator {
    dim: usize,
    matrix: SparseOp,
}

impl SuperOperator {
    /// Hilbert-space dimension `d`; the superoperator is `d² × d²`.
    pub fn hilbert_dim(&self) -> usize {
        self.dim
    }

    pub fn as_sparse(&self) -> &SparseOp {
        &self.matrix
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.matrix.to_dense()
    }

    /// `vec⁻¹(L · vec(ρ))`.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let v = rho.as_slice();
        let out: Vec<C64> = (0..self.matrix.dim())
            .map(|r| self.matrix.row(r).map(|(c, a)| a * v[c]).sum())
            .collect();
        DMatrix::from_vec(self.dim, self.dim, out)
    }
}

/// `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
fn sandwich(left: &SparseOp, right: &SparseOp) -> SparseOp {
    right.transpose().kron(left)
}

/// Vectorised generator with γ frozen at `gamma` (and the shift, if any,
/// frozen at its `t = 0` value).
pub fn build_constant_superoperator(ctx: &GeneratorContext, gamma: f64) -> Result<SuperOperator> {
    let n = ctx.spec.n_sites();
    if n > SUPEROPERATOR_SITE_CAP {
        return Err(Error::DimensionCap { n_sites: n, cap: SUPEROPERATOR_SITE_CAP });
    }
    let d = ctx.dim();
    let id = SparseOp::identity(d);
    let h = &ctx.hamiltonian;
    let mut l = sandwich(h, &id).scale(-I).add(&sandwich(&id, h).scale(I));
    for site in 1..=n {
        let z = ctx.ops.sigma_z(site);
        l = l.add(&sandwich(z, z).add(&id.kron(&id).scale(C64::from(-1.0))).scale(C64::from(0.5 * gamma)));
    }
    if ctx.shift {
        let s = ctx.rate.shift_at(0.0)?;
        for site in 1..=n {
            let z = ctx.ops.sigma_z(site);
            l = l.add(&sandwich(z, &id).scale(-I * s)).add(&sandwich(&id, z).scale(I * s));
        }
    }
    for ch in [&ctx.injection, &ctx.extraction] {
        if ch.rate == 0.0 {
            continue;
        }
        let k = C64::from(ch.rate);
        l = l
            .add(&sandwich(&ch.jump, &ch.jump_adj).scale(k))
            .add(&sandwich(&ch.loss, &id).scale(-0.5 * k))
            .add(&sandwich(&id, &ch.loss).scale(-0.5 * k));
    }
    Ok(SuperOperator { dim: d, matrix: l })
}
