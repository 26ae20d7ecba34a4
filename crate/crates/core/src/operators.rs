// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Sparse operators on the chain Hilbert space.
//!
//! Site operators are Kronecker products of one 2×2 factor with identities,
//! so they carry at most `2^N` non-zeros and are stored in CSR form.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::basis;
use crate::chain::ChainSpec;
use crate::{Error, Result, C64};

/// Default largest chain accepted by [`build_operators`].
pub const DEFAULT_SITE_CAP: usize = 12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Square complex matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOp {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![ONE; dim])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Builds from `(row, col, value)` entries; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, entries: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let mut entries: Vec<_> = entries.into_iter().collect();
        entries.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<C64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside {dim}x{dim}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { dim, row_ptr, cols, vals }.pruned()
    }

    fn pruned(self) -> Self {
        if self.vals.iter().all(|v| *v != ZERO) {
            return self;
        }
        let triplets: Vec<_> = self.iter().filter(|e| e.2 != ZERO).collect();
        let mut row_ptr = vec![0usize; self.dim + 1];
        for &(r, _, _) in &triplets {
            row_ptr[r + 1] += 1;
        }
        for r in 0..self.dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim: self.dim,
            row_ptr,
            cols: triplets.iter().map(|e| e.1).collect(),
            vals: triplets.iter().map(|e| e.2).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Non-zeros of one row as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    /// All non-zeros as `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r).find(|e| e.0 == c).map_or(ZERO, |e| e.1)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(r, c, v)| (c, r, v)))
    }

    /// Entry-wise complex conjugate.
    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= factor);
        out.pruned()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.iter().chain(other.iter()))
    }

    /// Sparse product `self · other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let entries = (0..self.dim).flat_map(|r| {
            self.row(r)
                .flat_map(move |(k, a)| other.row(k).map(move |(c, b)| (r, c, a * b)))
        });
        Self::from_triplets(self.dim, entries.collect::<Vec<_>>())
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).add(&other.mul(self).scale(-ONE))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let d = other.dim;
        Self::from_triplets(
            self.dim * d,
            self.iter().flat_map(|(r1, c1, a)| {
                other.iter().map(move |(r2, c2, b)| (r1 * d + r2, c1 * d + c2, a * b))
            }),
        )
    }

    pub fn is_diagonal(&self) -> bool {
        self.iter().all(|(r, c, _)| r == c)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    /// `out += factor · self · x`.
    pub fn mul_left_acc(&self, x: &DMatrix<C64>, factor: C64, out: &mut DMatrix<C64>) {
        let n = x.ncols();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                let a = a * factor;
                for j in 0..n {
                    out[(r, j)] += a * x[(k, j)];
                }
            }
        }
    }

    /// `out += factor · x · self`.
    pub fn mul_right_acc(&self, x: &DMatrix<C64>, factor: C64, out: &mut DMatrix<C64>) {
        let m = x.nrows();
        for k in 0..self.dim {
            for (c, a) in self.row(k) {
                let a = a * factor;
                let src = x.column(k);
                let mut dst = out.column_mut(c);
                for i in 0..m {
                    dst[i] += src[i] * a;
                }
            }
        }
    }

    /// `out += factor · self · x · other`.
    pub fn sandwich_acc(&self, x: &DMatrix<C64>, other: &Self, factor: C64, out: &mut DMatrix<C64>) {
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for l in 0..other.dim {
                    for (c, b) in other.row(l) {
                        out[(r, c)] += factor * a * x[(k, l)] * b;
                    }
                }
            }
        }
    }
}

/// `σᶻ`, `σ⁺`, `σ⁻` for every site, embedded in the `2^N` space.
#[derive(Debug, Clone)]
pub struct SiteOperatorSet {
    n_sites: usize,
    sigma_z: Vec<SparseOp>,
    sigma_plus: Vec<SparseOp>,
    sigma_minus: Vec<SparseOp>,
}

impl SiteOperatorSet {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// `σᶻ` on a 1-based site.
    pub fn sigma_z(&self, site: usize) -> &SparseOp {
        &self.sigma_z[site - 1]
    }

    /// `σ⁺ = |e⟩⟨g|` on a 1-based site.
    pub fn sigma_plus(&self, site: usize) -> &SparseOp {
        &self.sigma_plus[site - 1]
    }

    /// `σ⁻ = |g⟩⟨e|` on a 1-based site.
    pub fn sigma_minus(&self, site: usize) -> &SparseOp {
        &self.sigma_minus[site - 1]
    }

    /// Local occupation `σ⁺σ⁻` on a 1-based site.
    pub fn number(&self, site: usize) -> SparseOp {
        self.sigma_plus(site).mul(self.sigma_minus(site))
    }

    /// Total excitation number `N̂ = Σᵢ σᵢ⁺σᵢ⁻`.
    pub fn total_number(&self) -> SparseOp {
        (1..=self.n_sites).fold(SparseOp::zeros(self.dim()), |acc, i| acc.add(&self.number(i)))
    }
}

/// Single-site factors in the {excited, ground} ordering.
fn single_site() -> [SparseOp; 3] {
    let z = SparseOp::from_diagonal(&[ONE, -ONE]);
    let plus = SparseOp::from_triplets(2, [(0, 1, ONE)]);
    let minus = plus.adjoint();
    [z, plus, minus]
}

fn embed(local: &SparseOp, site: usize, n_sites: usize) -> SparseOp {
    let left = SparseOp::identity(1 << (site - 1));
    let right = SparseOp::identity(1 << (n_sites - site));
    left.kron(local).kron(&right)
}

/// Builds all site operators with the default size cap.
pub fn build_operators(spec: &ChainSpec) -> Result<SiteOperatorSet> {
    build_operators_capped(spec, DEFAULT_SITE_CAP)
}

pub fn build_operators_capped(spec: &ChainSpec, cap: usize) -> Result<SiteOperatorSet> {
    let n = spec.n_sites();
    if n > cap {
        return Err(Error::DimensionCap { n_sites: n, cap });
    }
    let [z, plus, minus] = single_site();
    Ok(SiteOperatorSet {
        n_sites: n,
        sigma_z: (1..=n).map(|i| embed(&z, i, n)).collect(),
        sigma_plus: (1..=n).map(|i| embed(&plus, i, n)).collect(),
        sigma_minus: (1..=n).map(|i| embed(&minus, i, n)).collect(),
    })
}

/// `H = Σᵢ (ωᵢ/2) σᵢᶻ + Σᵢ λᵢ (σᵢ⁺σᵢ₊₁⁻ + σᵢ₊₁⁺σᵢ⁻)`.
pub fn build_hamiltonian(spec: &ChainSpec, ops: &SiteOperatorSet) -> Result<SparseOp> {
    if ops.n_sites() != spec.n_sites() {
        return Err(Error::InvalidParameter("operator set does not match the chain".into()));
    }
    let n = spec.n_sites();
    let mut h = SparseOp::zeros(ops.dim());
    for (i, &omega) in spec.frequencies().iter().enumerate() {
        h = h.add(&ops.sigma_z(i + 1).scale(C64::from(omega / 2.0)));
    }
    for (i, &lambda) in spec.couplings().iter().enumerate() {
        let site = i + 1;
        let hop = ops
            .sigma_plus(site)
            .mul(ops.sigma_minus(site + 1))
            .add(&ops.sigma_plus(site + 1).mul(ops.sigma_minus(site)));
        h = h.add(&hop.scale(C64::from(lambda)));
    }
    debug_assert!((0..ops.dim()).all(|a| {
        h.row(a).all(|(c, _)| basis::excitations(a, n) == basis::excitations(c, n))
    }));
    Ok(h)
}
