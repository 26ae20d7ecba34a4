// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Excitation-number block representation of the density matrix.
//!
//! The Hamiltonian and the dephasing conserve the excitation number, and the
//! injection/extraction jumps change it by the same amount on both sides of
//! ρ. A state with no coherences between different excitation numbers (the
//! all-ground state in particular) therefore stays block-diagonal. Only the
//! entries inside the blocks are stored: for seven sites that is 3432 of the
//! 16384 matrix entries.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::basis;
use crate::density::{hermitian_eigenvalues, DensityMatrix};
use crate::liouvillian::GeneratorContext;
use crate::rate::RateModel;
use crate::{Error, Result, C64};

const NONE: u32 = u32::MAX;

/// Index bookkeeping for the block entries of a `2^N` density matrix.
#[derive(Debug, Clone)]
pub struct SectorLayout {
    n_sites: usize,
    dim: usize,
    /// `(row, col)` of each stored entry, grouped by block.
    pairs: Vec<(u32, u32)>,
    /// `index[col·d + row]` → stored position, or `NONE`.
    index: Vec<u32>,
    /// Stored position of the `(col, row)` partner of each entry.
    partner: Vec<u32>,
    /// Stored position of every diagonal entry `(a, a)`.
    diagonal: Vec<u32>,
    /// Basis states of each excitation-number block.
    blocks: Vec<Vec<usize>>,
}

impl SectorLayout {
    pub fn new(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        let mut blocks = vec![Vec::new(); n_sites + 1];
        for a in 0..dim {
            blocks[basis::excitations(a, n_sites)].push(a);
        }
        let mut pairs = Vec::new();
        let mut index = vec![NONE; dim * dim];
        for block in &blocks {
            for &c in block {
                for &r in block {
                    index[c * dim + r] = pairs.len() as u32;
                    pairs.push((r as u32, c as u32));
                }
            }
        }
        let partner = pairs.iter().map(|&(r, c)| index[r as usize * dim + c as usize]).collect();
        let diagonal = (0..dim).map(|a| index[a * dim + a]).collect();
        Self { n_sites, dim, pairs, index, partner, diagonal, blocks }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Number of stored entries.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Stored position of `ρ[row, col]`, if inside a block.
    #[inline]
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let p = self.index[col * self.dim + row];
        (p != NONE).then_some(p as usize)
    }

    pub fn entry(&self, position: usize) -> (usize, usize) {
        let (r, c) = self.pairs[position];
        (r as usize, c as usize)
    }

    /// Packs a block-diagonal density matrix.
    pub fn pack(&self, rho: &DensityMatrix) -> Result<Vec<C64>> {
        if rho.dim() != self.dim {
            return Err(Error::InvalidParameter("state dimension does not match the layout".into()));
        }
        if !rho.is_block_diagonal(self.n_sites, 0.0) {
            return Err(Error::NotBlockDiagonal);
        }
        let m = rho.matrix();
        Ok(self.pairs.iter().map(|&(r, c)| m[(r as usize, c as usize)]).collect())
    }

    pub fn unpack(&self, y: &[C64]) -> DensityMatrix {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (&(r, c), &v) in self.pairs.iter().zip(y) {
            m[(r as usize, c as usize)] = v;
        }
        DensityMatrix::from_matrix_unchecked(m)
    }

    pub fn ground(&self) -> Vec<C64> {
        let mut y = vec![C64::from(0.0); self.len()];
        let g = basis::ground_state(self.n_sites);
        y[self.diagonal[g] as usize] = C64::from(1.0);
        y
    }

    pub fn trace(&self, y: &[C64]) -> f64 {
        self.diagonal.iter().map(|&p| y[p as usize].re).sum()
    }

    /// `max |ρ − ρ†|` over the stored entries.
    pub fn hermiticity_residual(&self, y: &[C64]) -> f64 {
        self.partner
            .iter()
            .enumerate()
            .map(|(p, &q)| (y[p] - y[q as usize].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `ρ ← (ρ + ρ†)/2`, then `ρ ← ρ / Tr ρ`.
    pub fn hermitize_normalize(&self, y: &mut [C64]) {
        for (p, &q) in self.partner.iter().enumerate() {
            let q = q as usize;
            if q > p {
                let avg = (y[p] + y[q].conj()) * 0.5;
                y[p] = avg;
                y[q] = avg.conj();
            } else if q == p {
                y[p].im = 0.0;
            }
        }
        let tr = self.trace(y);
        y.iter_mut().for_each(|v| *v /= tr);
    }

    /// Site populations `nᵢ`.
    pub fn populations(&self, y: &[C64], out: &mut [f64]) {
        out.iter_mut().for_each(|n| *n = 0.0);
        for (a, &p) in self.diagonal.iter().enumerate() {
            let prob = y[p as usize].re;
            for (i, n) in out.iter_mut().enumerate() {
                if basis::is_excited(a, self.n_sites, i + 1) {
                    *n += prob;
                }
            }
        }
    }

    /// Smallest eigenvalue over all blocks.
    pub fn min_eigenvalue(&self, y: &[C64]) -> f64 {
        self.blocks
            .iter()
            .map(|block| {
                let m = DMatrix::from_fn(block.len(), block.len(), |r, c| {
                    y[self.position(block[r], block[c]).expect("block entry")]
                });
                hermitian_eigenvalues(&m)[0]
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Master-equation generator restricted to the block entries.
///
/// The time-independent part is a sparse matrix over stored positions; the
/// dephasing and the energy shift are diagonal in this representation and
/// are scaled by γ(t) and s(t) at each evaluation.
#[derive(Debug, Clone)]
pub struct SectorGenerator {
    layout: SectorLayout,
    rate: RateModel,
    shift: bool,
    static_diag: Vec<C64>,
    /// `Σᵢ ½(zᵢ(r) zᵢ(c) − 1)` for each entry.
    dephasing: Vec<f64>,
    /// `Σᵢ (zᵢ(r) − zᵢ(c))` for each entry.
    shift_diag: Vec<f64>,
    /// Hamming distance of the entry's row and column, `−dephasing`.
    weights: Vec<u8>,
    row_ptr: Vec<u32>,
    cols: Vec<u32>,
    vals: Vec<C64>,
}

impl SectorGenerator {
    pub fn new(ctx: &GeneratorContext) -> Result<Self> {
        let n = ctx.spec().n_sites();
        let layout = SectorLayout::new(n);
        let ops = ctx.operators();
        let z: Vec<Vec<f64>> =
            (1..=n).map(|i| ops.sigma_z(i).diagonal().iter().map(|v| v.re).collect()).collect();
        if (1..=n).any(|i| !ops.sigma_z(i).is_diagonal()) {
            return Err(Error::InvalidParameter("dephasing operators must be diagonal".into()));
        }

        let h = ctx.hamiltonian();
        let h_t = h.transpose();
        let channels: Vec<_> = [ctx.injection(), ctx.extraction()]
            .into_iter()
            .filter(|ch| ch.rate != 0.0)
            .map(|ch| (ch.rate, &ch.jump, ch.loss.transpose(), &ch.loss))
            .collect();

        let m = layout.len();
        let mut static_diag = vec![C64::from(0.0); m];
        let mut dephasing = vec![0.0; m];
        let mut shift_diag = vec![0.0; m];
        let mut row_ptr = Vec::with_capacity(m + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut row: Vec<(u32, C64)> = Vec::new();
        row_ptr.push(0);

        for p in 0..m {
            let (a, b) = layout.entry(p);
            row.clear();
            let mut push = |r: usize, c: usize, v: C64| -> Result<()> {
                let q = layout.position(r, c).ok_or(Error::NotBlockDiagonal)?;
                row.push((q as u32, v));
                Ok(())
            };
            // −i(Hρ − ρH)
            for (c, v) in h.row(a) {
                push(c, b, C64::new(0.0, -1.0) * v)?;
            }
            for (c, v) in h_t.row(b) {
                push(a, c, C64::new(0.0, 1.0) * v)?;
            }
            // κ (A ρ A† − ½ A†A ρ − ½ ρ A†A)
            for (kappa, jump, loss_t, loss) in &channels {
                let k = C64::from(*kappa);
                for (c, x) in jump.row(a) {
                    for (e, w) in jump.row(b) {
                        push(c, e, k * x * w.conj())?;
                    }
                }
                for (c, v) in loss.row(a) {
                    push(c, b, -0.5 * k * v)?;
                }
                for (c, v) in loss_t.row(b) {
                    push(a, c, -0.5 * k * v)?;
                }
            }
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(u32, C64)> = Vec::with_capacity(row.len());
            for &(q, v) in &row {
                match merged.last_mut() {
                    Some(last) if last.0 == q => last.1 += v,
                    _ => merged.push((q, v)),
                }
            }
            for (q, v) in merged {
                if q as usize == p {
                    static_diag[p] += v;
                } else if v != C64::from(0.0) {
                    cols.push(q);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len() as u32);
            dephasing[p] = z.iter().map(|zi| 0.5 * (zi[a] * zi[b] - 1.0)).sum();
            shift_diag[p] = z.iter().map(|zi| zi[a] - zi[b]).sum();
        }

        let weights = dephasing.iter().map(|d| libm::round(-d) as u8).collect();
        Ok(Self {
            layout,
            rate: ctx.rate().clone(),
            shift: ctx.has_shift(),
            static_diag,
            weights,
            dephasing,
            shift_diag,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn layout(&self) -> &SectorLayout {
        &self.layout
    }

    pub fn rate(&self) -> &RateModel {
        &self.rate
    }

    /// The dephasing term acts on entry `p` as `−γ(t) wₚ yₚ`; these are the
    /// `wₚ`.
    pub fn dephasing_weights(&self) -> &[u8] {
        &self.weights
    }

    /// `dy = L(t) y` with only the constant offset of γ in the dephasing
    /// term.
    pub fn rhs_without_oscillation(&self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        let shift = if self.shift { self.rate.shift_at(t)? } else { 0.0 };
        self.apply_frozen(self.rate.offset(), shift, y, dy);
        Ok(())
    }

    /// Number of stored off-diagonal couplings.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Gershgorin bound on the spectral radius of the generator for
    /// `|γ| ≤ gamma_max` and `|s| ≤ shift_max`.
    pub fn spectral_bound(&self, gamma_max: f64, shift_max: f64) -> f64 {
        (0..self.layout.len())
            .map(|p| {
                let span = self.row_ptr[p] as usize..self.row_ptr[p + 1] as usize;
                let off: f64 = self.vals[span].iter().map(|v| v.norm()).sum();
                self.static_diag[p].norm()
                    + gamma_max * libm::fabs(self.dephasing[p])
                    + shift_max * libm::fabs(self.shift_diag[p])
                    + off
            })
            .fold(0.0, f64::max)
    }

    /// `(γ(t), s(t))`.
    pub fn coefficients_at(&self, t: f64) -> Result<(f64, f64)> {
        let gamma = self.rate.rate_at(t)?;
        let shift = if self.shift { self.rate.shift_at(t)? } else { 0.0 };
        Ok((gamma, shift))
    }

    /// `dy = L(t) y`.
    pub fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        let (gamma, shift) = self.coefficients_at(t)?;
        self.apply_frozen(gamma, shift, y, dy);
        Ok(())
    }

    /// `dy = L y` with γ and s fixed.
    pub fn apply_frozen(&self, gamma: f64, shift: f64, y: &[C64], dy: &mut [C64]) {
        let m = self.layout.len();
        assert!(y.len() >= m && dy.len() >= m);
        for p in 0..m {
            let diag = self.static_diag[p]
                + C64::new(gamma * self.dephasing[p], -shift * self.shift_diag[p]);
            let mut acc = diag * y[p];
            let span = self.row_ptr[p] as usize..self.row_ptr[p + 1] as usize;
            for (&q, &v) in self.cols[span.clone()].iter().zip(&self.vals[span]) {
                acc += v * y[q as usize];
            }
            dy[p] = acc;
        }
    }
}
