// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use alloc::vec::Vec;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial panels per period of the fastest frequency component.
    pub points_per_period: usize,
    pub max_intervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-13, points_per_period: 200, max_intervals: 100_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn kronrod<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<Estimate> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut gauss = fc * WG[3];
    let mut kron = fc * WGK[7];
    for (j, &x) in XGK[..7].iter().enumerate() {
        let f1 = f(center - half * x)?;
        let f2 = f(center + half * x)?;
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Estimate { value: kron * half, error: libm::fabs((kron - gauss) * half) })
}

/// Integrates `f` over `[a, b]`, starting from `panels` equal subintervals
/// and bisecting the worst one until the summed error estimate is within
/// `max(abs_tol, rel_tol · |value|)`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, panels: usize, config: &QuadratureConfig) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut intervals: Vec<(f64, f64, Estimate)> = Vec::with_capacity(panels);
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == panels { b } else { lo + width };
        intervals.push((lo, hi, kronrod(&mut f, lo, hi)?));
    }
    loop {
        let value: f64 = intervals.iter().map(|iv| iv.2.value).sum();
        let error: f64 = intervals.iter().map(|iv| iv.2.error).sum();
        if error <= config.abs_tol.max(config.rel_tol * libm::fabs(value)) {
            return Ok(Estimate { value, error });
        }
        if intervals.len() >= config.max_intervals {
            return Err(Error::NoConvergence("quadrature"));
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, iv)| if iv.2.error > best.1 { (i, iv.2.error) } else { best });
        let (lo, hi, _) = intervals[worst];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::NoConvergence("quadrature"));
        }
        intervals[worst] = (lo, mid, kronrod(&mut f, lo, mid)?);
        intervals.push((mid, hi, kronrod(&mut f, mid, hi)?));
    }
}
