// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::basis;
use crate::operators::SparseOp;
use crate::{Error, Result, C64};

/// Dense density matrix of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(DMatrix<C64>);

impl DensityMatrix {
    /// All sites in the ground state.
    pub fn ground(n_sites: usize) -> Self {
        let d = 1 << n_sites;
        let mut m = DMatrix::zeros(d, d);
        let g = basis::ground_state(n_sites);
        m[(g, g)] = C64::from(1.0);
        Self(m)
    }

    /// Projector onto a computational basis state.
    pub fn basis_state(n_sites: usize, state: usize) -> Self {
        let d = 1 << n_sites;
        let mut m = DMatrix::zeros(d, d);
        m[(state, state)] = C64::from(1.0);
        Self(m)
    }

    /// `|ψ⟩⟨ψ|` for a normalised or unnormalised state vector.
    pub fn pure(psi: &[C64]) -> Self {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let d = psi.len();
        Self(DMatrix::from_fn(d, d, |r, c| psi[r] * psi[c].conj() / norm))
    }

    /// Wraps a matrix after checking it is square and Hermitian within `1e-10`.
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidParameter("density matrix must be square".into()));
        }
        let rho = Self(m);
        if rho.hermiticity_residual() > 1e-10 {
            return Err(Error::InvalidParameter("density matrix must be Hermitian".into()));
        }
        Ok(rho)
    }

    /// Wraps without any checks.
    pub fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.0)
    }

    /// `ρ ← (ρ + ρ†)/2`.
    pub fn hermitize(&mut self) {
        let d = self.dim();
        for c in 0..d {
            for r in 0..c {
                let avg = (self.0[(r, c)] + self.0[(c, r)].conj()) * 0.5;
                self.0[(r, c)] = avg;
                self.0[(c, r)] = avg.conj();
            }
            self.0[(c, c)].im = 0.0;
        }
    }

    /// `ρ ← ρ / Tr ρ`.
    pub fn normalize(&mut self) {
        let tr = self.trace().re;
        self.0 /= C64::from(tr);
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ ρ_rc ρ_cr; equals Σ|ρ_rc|² for Hermitian ρ.
        let d = self.dim();
        let mut acc = C64::from(0.0);
        for r in 0..d {
            for c in 0..d {
                acc += self.0[(r, c)] * self.0[(c, r)];
            }
        }
        acc.re
    }

    /// `Tr(A ρ)`.
    pub fn expectation(&self, op: &SparseOp) -> C64 {
        op.iter().map(|(r, c, v)| v * self.0[(c, r)]).sum()
    }

    /// Excited-state population of every site, `nᵢ = ⟨σᵢ⁺σᵢ⁻⟩`.
    pub fn site_populations(&self, n_sites: usize) -> Vec<f64> {
        let mut pops = alloc::vec![0.0; n_sites];
        for a in 0..self.dim() {
            let p = self.0[(a, a)].re;
            for (i, n) in pops.iter_mut().enumerate() {
                if basis::is_excited(a, n_sites, i + 1) {
                    *n += p;
                }
            }
        }
        pops
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `½ ‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let diff = &self.0 - &other.0;
        0.5 * hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>()
    }

    /// True when no entry couples basis states with different excitation
    /// numbers beyond `tol`.
    pub fn is_block_diagonal(&self, n_sites: usize, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|c| {
            (0..d).all(|r| {
                basis::excitations(r, n_sites) == basis::excitations(c, n_sites)
                    || self.0[(r, c)].norm() <= tol
            })
        })
    }
}

pub(crate) fn hermiticity_residual(m: &DMatrix<C64>) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for c in 0..d {
        for r in 0..=c {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of `(m + m†)/2`, ascending.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::from(0.5);
    let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}
