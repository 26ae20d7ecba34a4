// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Restarted GMRES for complex linear systems given only as a matrix-vector
//! product.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    /// Krylov subspace size before restarting.
    pub restart: usize,
    /// Total number of operator applications allowed.
    pub max_iter: usize,
    /// Stop when `‖b − A x‖₂ ≤ tol`.
    pub tol: f64,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self { restart: 60, max_iter: 400, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Ritz values of `A` from the first Arnoldi cycle (eigenvalues of the
    /// projected Hessenberg matrix). Empty if that cycle did not run.
    pub ritz: Vec<C64>,
}

/// Eigenvalues of the leading `k × k` block of a Hessenberg matrix.
fn hessenberg_eigenvalues(h: &[Vec<C64>], k: usize) -> Vec<C64> {
    if k == 0 {
        return Vec::new();
    }
    let m = nalgebra::DMatrix::from_fn(k, k, |i, j| h[i][j]);
    match nalgebra::Schur::try_new(m, 1e-14, 100 * k) {
        Some(schur) => schur.eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default(),
        None => Vec::new(),
    }
}

fn norm(v: &[C64]) -> f64 {
    libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum())
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Solves `A x = b`, starting from the contents of `x`.
pub fn solve<F>(mut apply: F, b: &[C64], x: &mut [C64], config: &GmresConfig) -> Result<GmresOutcome>
where
    F: FnMut(&[C64], &mut [C64]) -> Result<()>,
{
    let n = b.len();
    let m = config.restart.max(1);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![C64::from(0.0); m]; m + 1];
    let mut cs = vec![0.0f64; m];
    let mut sn = vec![C64::from(0.0); m];
    let mut g = vec![C64::from(0.0); m + 1];
    let mut w = vec![C64::from(0.0); n];
    let mut iterations = 0;
    let mut raw: Option<Vec<Vec<C64>>> = Some(vec![vec![C64::from(0.0); m]; m + 1]);
    let mut ritz = Vec::new();

    loop {
        apply(x, &mut w)?;
        let r: Vec<C64> = b.iter().zip(&w).map(|(bi, wi)| bi - wi).collect();
        let beta = norm(&r);
        if beta <= config.tol || iterations >= config.max_iter {
            return Ok(GmresOutcome { iterations, residual: beta, converged: beta <= config.tol, ritz });
        }
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.iter_mut().for_each(|v| *v = C64::from(0.0));
        g[0] = C64::from(beta);

        let mut k = 0;
        while k < m && iterations < config.max_iter {
            apply(&basis[k], &mut w)?;
            iterations += 1;
            for (j, v) in basis.iter().enumerate() {
                let hjk = dot(v, &w);
                h[j][k] = hjk;
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hjk * vi);
            }
            let hnext = norm(&w);
            h[k + 1][k] = C64::from(hnext);
            if let Some(raw) = raw.as_mut() {
                for j in 0..=k + 1 {
                    raw[j][k] = h[j][k];
                }
            }
            for j in 0..k {
                let (a, bb) = (h[j][k], h[j + 1][k]);
                h[j][k] = cs[j] * a + sn[j] * bb;
                h[j + 1][k] = -sn[j].conj() * a + cs[j] * bb;
            }
            // Givens rotation zeroing h[k+1][k].
            let (a, bb) = (h[k][k], h[k + 1][k]);
            let r = libm::hypot(a.norm(), bb.norm());
            if r == 0.0 {
                cs[k] = 1.0;
                sn[k] = C64::from(0.0);
            } else {
                cs[k] = a.norm() / r;
                let phase = if a.norm() == 0.0 { C64::from(1.0) } else { a / a.norm() };
                sn[k] = phase * bb.conj() / r;
            }
            h[k][k] = cs[k] * a + sn[k] * bb;
            h[k + 1][k] = C64::from(0.0);
            g[k + 1] = -sn[k].conj() * g[k];
            g[k] *= cs[k];
            k += 1;
            if g[k].norm() <= config.tol || hnext == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }

        if let Some(raw) = raw.take() {
            ritz = hessenberg_eigenvalues(&raw, k);
        }

        // Back substitution for the least-squares coefficients.
        let mut coeff = vec![C64::from(0.0); k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[i][j] * coeff[j];
            }
            coeff[i] = s / h[i][i];
        }
        for (c, v) in coeff.iter().zip(&basis) {
            x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += c * vi);
        }
    }
}
