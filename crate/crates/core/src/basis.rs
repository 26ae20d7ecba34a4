// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Computational basis of the chain.
//!
//! A basis state is an index `0..2^N`. Site `i` (1-based) occupies bit
//! `N - i`, so site 1 is the most significant bit and the leftmost Kronecker
//! factor. A cleared bit means the site is excited, a set bit means ground.
//! The all-ground state is therefore `2^N - 1`.

/// Bit mask of site `site` (1-based) in an `n_sites` chain.
#[inline]
pub const fn site_mask(n_sites: usize, site: usize) -> usize {
    1 << (n_sites - site)
}

#[inline]
pub const fn is_excited(state: usize, n_sites: usize, site: usize) -> bool {
    state & site_mask(n_sites, site) == 0
}

/// Eigenvalue of `σᶻ` on `site`: +1 excited, -1 ground.
#[inline]
pub const fn sigma_z(state: usize, n_sites: usize, site: usize) -> f64 {
    if is_excited(state, n_sites, site) {
        1.0
    } else {
        -1.0
    }
}

/// Number of excited sites.
#[inline]
pub const fn excitations(state: usize, n_sites: usize) -> usize {
    n_sites - state.count_ones() as usize
}

#[inline]
pub const fn ground_state(n_sites: usize) -> usize {
    (1 << n_sites) - 1
}
