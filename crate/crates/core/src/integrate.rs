// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Dormand–Prince 5(4) integrator for complex linear-algebra states.
//!
//! The local error estimate is controlled in the max norm against
//! `atol + rtol · max(‖y‖∞, ‖y_new‖∞)`.
//!
//! A system may declare a diagonal part `−g(t) wᵢ yᵢ` with integer weights
//! `wᵢ` (see [`ExactDiagonal`]). That part is then integrated exactly and the
//! Runge–Kutta pair acts on `zᵢ = exp(wᵢ ∫ g) yᵢ`, referenced to the start
//! of each step (Lawson's integrating-factor scheme).

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result, C64};

/// Right-hand side `dy/dt = f(t, y)`.
pub trait OdeSystem {
    /// The right-hand side, without the diagonal part if
    /// [`exact_part`](Self::exact_part) returns one.
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()>;

    fn exact_part(&self) -> Option<&dyn ExactDiagonal> {
        None
    }
}

/// Diagonal linear term `−g(t) wᵢ yᵢ`.
pub trait ExactDiagonal {
    /// Weights `wᵢ`; components past the end have weight 0.
    fn weights(&self) -> &[u8];
    /// `∫ g` over `[t0, t1]`.
    fn integral(&self, t0: f64, t1: f64) -> Result<f64>;
}

impl<F> OdeSystem for F
where
    F: Fn(f64, &[C64], &mut [C64]) -> Result<()>,
{
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        self(t, y, dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    /// Relative step floor; a step below `min_step_ratio · max(1, |t|)` aborts.
    pub min_step_ratio: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, initial_step: 1e-2, max_step: 1.0, min_step_ratio: 1e-13 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// PI step-size controller constants.
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - 0.75 * BETA;
const MAX_GROWTH: f64 = 10.0;
const MAX_SHRINK: f64 = 5.0;

/// Adaptive stepper with its own workspace. The first-same-as-last stage is
/// reused across calls as long as the state is only modified at round-off
/// level between them.
#[derive(Debug, Clone)]
pub struct DormandPrince {
    control: StepControl,
    k: [Vec<C64>; 7],
    y_stage: Vec<C64>,
    y_new: Vec<C64>,
    h: f64,
    err_old: f64,
    fsal: Option<f64>,
    stats: StepStats,
    record: Option<Vec<(f64, f64)>>,
    /// `exp(−l ∫ g)` over `[t, t + cⱼh]` for each stage node and weight `l`.
    decay: [Vec<f64>; 5],
    growth: [Vec<f64>; 5],
    scratch: Vec<C64>,
    split: bool,
}

const NODES: [f64; 5] = [C2, C3, C4, C5, 1.0];

impl DormandPrince {
    pub fn new(dim: usize, control: StepControl) -> Self {
        let zeros = || vec![C64::from(0.0); dim];
        Self {
            control,
            k: [zeros(), zeros(), zeros(), zeros(), zeros(), zeros(), zeros()],
            y_stage: zeros(),
            y_new: zeros(),
            h: control.initial_step,
            err_old: 1e-4,
            fsal: None,
            stats: StepStats::default(),
            record: None,
            decay: Default::default(),
            growth: Default::default(),
            scratch: zeros(),
            split: false,
        }
    }

    pub fn control(&self) -> &StepControl {
        &self.control
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    /// Suggested size of the next step.
    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Forget the cached first stage (call after changing `y` by more than
    /// round-off).
    pub fn invalidate(&mut self) {
        self.fsal = None;
    }

    /// Starts recording accepted `(t, h)` pairs.
    pub fn start_recording(&mut self) {
        self.record = Some(Vec::new());
    }

    pub fn take_recording(&mut self) -> Vec<(f64, f64)> {
        self.record.take().unwrap_or_default()
    }

    fn prepare_factors(&mut self, exact: &dyn ExactDiagonal, t: f64, h: f64) -> Result<()> {
        let levels = exact.weights().iter().copied().max().unwrap_or(0) as usize + 1;
        for (j, &c) in NODES.iter().enumerate() {
            let g = exact.integral(t, t + c * h)?;
            self.decay[j].clear();
            self.growth[j].clear();
            for l in 0..levels {
                self.decay[j].push(libm::exp(-g * l as f64));
                self.growth[j].push(libm::exp(g * l as f64));
            }
        }
        Ok(())
    }

    /// `k = f(t_node, ·)` at stage value `z`, in the coordinates of the
    /// current step.
    fn eval<S: OdeSystem + ?Sized>(&mut self, sys: &S, node: usize, t: f64, z: &[C64], k: usize) -> Result<()> {
        let Some(exact) = sys.exact_part().filter(|_| self.split) else {
            return sys.rhs(t, z, &mut self.k[k]);
        };
        let w = exact.weights();
        let (decay, growth) = (&self.decay[node], &self.growth[node]);
        for (i, (s, zi)) in self.scratch.iter_mut().zip(z).enumerate() {
            *s = zi * w.get(i).map_or(1.0, |&l| decay[l as usize]);
        }
        sys.rhs(t, &self.scratch, &mut self.k[k])?;
        for (ki, &l) in self.k[k].iter_mut().zip(w) {
            *ki *= growth[l as usize];
        }
        Ok(())
    }

    fn stages<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, h: f64, y: &[C64]) -> Result<()> {
        self.split = false;
        if let Some(exact) = sys.exact_part() {
            self.prepare_factors(exact, t, h)?;
            self.split = true;
        }
        if self.fsal != Some(t) {
            sys.rhs(t, y, &mut self.k[0])?;
            self.stats.rhs_evals += 1;
        }
        let n = y.len();
        let mut ys = core::mem::take(&mut self.y_stage);
        {
            let [k1, ..] = &self.k;
            for i in 0..n {
                ys[i] = y[i] + k1[i] * (h * A21);
            }
        }
        self.eval(sys, 0, t + C2 * h, &ys, 1)?;
        {
            let [k1, k2, ..] = &self.k;
            for i in 0..n {
                ys[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
            }
        }
        self.eval(sys, 1, t + C3 * h, &ys, 2)?;
        {
            let [k1, k2, k3, ..] = &self.k;
            for i in 0..n {
                ys[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
            }
        }
        self.eval(sys, 2, t + C4 * h, &ys, 3)?;
        {
            let [k1, k2, k3, k4, ..] = &self.k;
            for i in 0..n {
                ys[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
            }
        }
        self.eval(sys, 3, t + C5 * h, &ys, 4)?;
        {
            let [k1, k2, k3, k4, k5, ..] = &self.k;
            for i in 0..n {
                ys[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
            }
        }
        self.eval(sys, 4, t + h, &ys, 5)?;
        self.y_stage = ys;
        let mut yn = core::mem::take(&mut self.y_new);
        {
            let [k1, _, k3, k4, k5, k6, _] = &self.k;
            for i in 0..n {
                yn[i] = y[i] + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
            }
        }
        self.eval(sys, 4, t + h, &yn, 6)?;
        // Back to the original coordinates at the end of the step.
        if let Some(exact) = sys.exact_part().filter(|_| self.split) {
            for (v, &l) in yn.iter_mut().zip(exact.weights()) {
                *v *= self.decay[4][l as usize];
            }
        }
        self.y_new = yn;
        self.stats.rhs_evals += 6;
        Ok(())
    }

    /// Makes the last stage the first stage of the next step.
    fn shift_fsal<S: OdeSystem + ?Sized>(&mut self, sys: &S) {
        if let Some(exact) = sys.exact_part().filter(|_| self.split) {
            for (k, &l) in self.k[6].iter_mut().zip(exact.weights()) {
                *k *= self.decay[4][l as usize];
            }
        }
        self.k.swap(0, 6);
    }

    fn error_norm<S: OdeSystem + ?Sized>(&self, sys: &S, h: f64, y: &[C64]) -> f64 {
        let [k1, _, k3, k4, k5, k6, k7] = &self.k;
        let weights = sys.exact_part().filter(|_| self.split).map_or(&[][..], |e| e.weights());
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..y.len() {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let e = weights.get(i).map_or(e, |&l| e * self.decay[4][l as usize]);
            err = err.max(e.norm());
            scale = scale.max(y[i].norm()).max(self.y_new[i].norm());
        }
        err / (self.control.atol + self.control.rtol * scale)
    }

    /// Integrates from `*t` to `t_end`, landing exactly on `t_end`.
    /// `on_accept(t, y)` runs after every accepted step and may apply
    /// round-off-sized corrections to `y`.
    pub fn advance<S, F>(
        &mut self,
        sys: &S,
        t: &mut f64,
        t_end: f64,
        y: &mut [C64],
        mut on_accept: F,
    ) -> Result<()>
    where
        S: OdeSystem + ?Sized,
        F: FnMut(f64, &mut [C64]) -> Result<()>,
    {
        let mut last_rejected = false;
        while *t < t_end {
            let remaining = t_end - *t;
            let h_floor = self.control.min_step_ratio * t.abs().max(1.0);
            let mut h = self.h.min(self.control.max_step);
            let clipped = h >= remaining;
            if clipped || remaining - h < h_floor {
                h = remaining;
            }
            self.stages(sys, *t, h, y)?;
            let err = self.error_norm(sys, h, y);
            if !err.is_finite() {
                return Err(Error::StepUnderflow { t: *t, h });
            }
            if err <= 1.0 {
                let fac = libm::pow(err, EXPO) / libm::pow(self.err_old, BETA);
                let fac = (fac / SAFETY).clamp(1.0 / MAX_GROWTH, MAX_SHRINK);
                let mut h_next = h / fac;
                if last_rejected {
                    h_next = h_next.min(h);
                }
                self.err_old = err.max(1e-4);
                if let Some(rec) = &mut self.record {
                    rec.push((*t, h));
                }
                *t = if h == remaining { t_end } else { *t + h };
                y.copy_from_slice(&self.y_new);
                self.shift_fsal(sys);
                self.fsal = Some(*t);
                self.stats.accepted += 1;
                // A step shortened to land on t_end says nothing about the next one.
                if !(clipped && h_next < self.h) {
                    self.h = h_next;
                }
                last_rejected = false;
                on_accept(*t, y)?;
            } else {
                self.stats.rejected += 1;
                let shrink = (libm::pow(err, EXPO) / SAFETY).min(MAX_SHRINK);
                self.h = h / shrink;
                last_rejected = true;
                if self.h < h_floor {
                    return Err(Error::StepUnderflow { t: *t, h: self.h });
                }
            }
        }
        Ok(())
    }

    /// Replays a recorded step sequence without error control. For a linear
    /// system this is a fixed linear map of `y`.
    pub fn replay<S: OdeSystem + ?Sized>(
        &mut self,
        sys: &S,
        schedule: &[(f64, f64)],
        y: &mut [C64],
    ) -> Result<()> {
        self.fsal = None;
        for &(t, h) in schedule {
            self.stages(sys, t, h, y)?;
            y.copy_from_slice(&self.y_new);
            self.shift_fsal(sys);
            self.fsal = Some(t + h);
        }
        // Recorded step boundaries need not match the caller's next start time.
        self.fsal = None;
        Ok(())
    }
}
