// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

//! Time integration, periodic steady states and the algebraic steady state.
//!
//! States that are block-diagonal in the excitation number (everything that
//! starts from the all-ground state) are integrated in the compact
//! [`sector`](crate::sector) representation; anything else uses the full
//! density matrix.
//!
//! The periodic steady state is the one-window average of the populations on
//! the attracting orbit. The window is the drive period of γ(t), or
//! [`IntegratorConfig::probe_window`] for a constant rate. Consecutive window
//! averages of the extraction-site population must agree to
//! [`IntegratorConfig::steady_tol`] (relative). With
//! [`IntegratorConfig::accelerate`] set, the fixed point of the one-window
//! map is solved for directly by GMRES, replaying the step sequence of the
//! last adaptive window, before the plain window iteration resumes and checks
//! the criterion.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::density::{hermitian_eigenvalues, hermiticity_residual, DensityMatrix};
use crate::gmres::{self, GmresConfig};
use crate::integrate::{DormandPrince, ExactDiagonal, OdeSystem, StepControl, StepStats};
use crate::liouvillian::{build_constant_superoperator, GeneratorContext};
use crate::sector::SectorGenerator;
use crate::{Error, Result, C64};

/// Largest `|Tr ρ − 1|` tolerated after an accepted step.
pub const TRACE_TOL: f64 = 1e-9;
/// Largest `max |ρ − ρ†|` tolerated after an accepted step.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Most negative eigenvalue tolerated at a checkpoint.
pub const POSITIVITY_TOL: f64 = -1e-8;
/// Site cap for the dense null-space solve.
pub const NULLSPACE_SITE_CAP: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    /// Budget of integrated time, replayed windows included.
    pub t_max: f64,
    /// Averaging window for a constant rate.
    pub probe_window: f64,
    /// Relative agreement of consecutive window averages of `p_ext`.
    pub steady_tol: f64,
    /// Start averaging this fraction of a window after `t = 0`.
    pub window_phase: f64,
    /// Solve for the window fixed point with GMRES.
    pub accelerate: bool,
    /// Abort when a checkpoint eigenvalue falls below [`POSITIVITY_TOL`].
    /// When unset the minimum is only recorded in the [`InvariantLog`].
    pub enforce_positivity: bool,
    /// Integrate the oscillating part of the dephasing term exactly in the
    /// block representation (integrating-factor form of the Runge–Kutta
    /// pair).
    pub exact_dephasing: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            initial_step: 1e-2,
            max_step: 1.0,
            t_max: 100_000.0,
            probe_window: 10.0,
            steady_tol: 1e-8,
            window_phase: 0.0,
            accelerate: true,
            enforce_positivity: true,
            exact_dephasing: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("initial_step", self.initial_step),
            ("max_step", self.max_step),
            ("t_max", self.t_max),
            ("probe_window", self.probe_window),
            ("steady_tol", self.steady_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(alloc::format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.window_phase) {
            return Err(Error::InvalidParameter("window_phase must lie in [0, 1)".into()));
        }
        Ok(())
    }

    fn step_control(&self) -> StepControl {
        StepControl {
            rtol: self.rtol,
            atol: self.atol,
            initial_step: self.initial_step,
            max_step: self.max_step,
            ..StepControl::default()
        }
    }
}

/// Extremes of the state invariants seen during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantLog {
    pub steps: usize,
    pub checkpoints: usize,
    /// Largest `|Tr ρ − 1|` after a step, before renormalisation.
    pub max_trace_error: f64,
    /// Largest Hermiticity residual after a step, before symmetrisation.
    pub max_hermiticity_residual: f64,
    /// Smallest eigenvalue over all checkpoints.
    pub min_eigenvalue: f64,
}

impl Default for InvariantLog {
    fn default() -> Self {
        Self {
            steps: 0,
            checkpoints: 0,
            max_trace_error: 0.0,
            max_hermiticity_residual: 0.0,
            min_eigenvalue: f64::INFINITY,
        }
    }
}

impl InvariantLog {
    pub fn merge(&mut self, other: &InvariantLog) {
        self.steps += other.steps;
        self.checkpoints += other.checkpoints;
        self.max_trace_error = self.max_trace_error.max(other.max_trace_error);
        self.max_hermiticity_residual = self.max_hermiticity_residual.max(other.max_hermiticity_residual);
        self.min_eigenvalue = self.min_eigenvalue.min(other.min_eigenvalue);
    }

    fn step(&mut self, t: f64, trace_error: f64, residual: f64) -> Result<()> {
        self.steps += 1;
        self.max_trace_error = self.max_trace_error.max(trace_error);
        self.max_hermiticity_residual = self.max_hermiticity_residual.max(residual);
        if !(trace_error <= TRACE_TOL) {
            return Err(Error::InvariantViolation { t, what: "trace", value: trace_error });
        }
        if !(residual <= HERMITICITY_TOL) {
            return Err(Error::InvariantViolation { t, what: "hermiticity", value: residual });
        }
        Ok(())
    }

    fn checkpoint(&mut self, t: f64, min_eigenvalue: f64, enforce: bool) -> Result<()> {
        self.checkpoints += 1;
        self.min_eigenvalue = self.min_eigenvalue.min(min_eigenvalue);
        if enforce && !(min_eigenvalue >= POSITIVITY_TOL) {
            return Err(Error::InvariantViolation { t, what: "positivity", value: min_eigenvalue });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    pub times: Vec<f64>,
    /// Site populations at each sample time.
    pub populations: Vec<Vec<f64>>,
    /// `Tr ρ²` at each sample time.
    pub purity: Vec<f64>,
    pub final_state: DensityMatrix,
    pub stats: StepStats,
    pub invariants: InvariantLog,
}

#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    pub converged: bool,
    /// The state grew without bound instead of settling.
    pub diverged: bool,
    /// Window-averaged population of the extraction site.
    pub p_ext: f64,
    /// Window-averaged site populations.
    pub populations: Vec<f64>,
    /// Windows integrated, replayed ones included.
    pub periods: usize,
    /// Window length used for averaging.
    pub window: f64,
    /// Relative change of `p_ext` between the last two windows.
    pub residual: f64,
    /// State at the start of the last window.
    pub state: DensityMatrix,
    /// Largest modulus among the estimated eigenvalues of the one-window
    /// map on traceless operators (0 when no fixed-point solve ran). Above 1
    /// there is no bounded periodic attractor.
    pub floquet_radius: f64,
    pub stats: StepStats,
    pub invariants: InvariantLog,
}

/// A state vector layout together with its generator.
trait Representation: OdeSystem {
    fn len(&self) -> usize;
    fn n_sites(&self) -> usize;
    fn trace(&self, y: &[C64]) -> f64;
    fn hermiticity_residual(&self, y: &[C64]) -> f64;
    fn hermitize_normalize(&self, y: &mut [C64]);
    fn add_populations(&self, y: &[C64], scale: f64, out: &mut [C64]);
    fn min_eigenvalue(&self, y: &[C64]) -> f64;
    fn to_density(&self, y: &[C64]) -> DensityMatrix;
}

// The dephasing term is diagonal here. Its oscillating part is integrated
// exactly, which removes the stiffness of sharply peaked rates. The constant
// offset stays in the right-hand side: there the plain pair keeps
// stationary states exactly stationary, the exponential form does not.
impl OdeSystem for SectorGenerator {
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        self.rhs_without_oscillation(t, y, dy)
    }

    fn exact_part(&self) -> Option<&dyn ExactDiagonal> {
        if self.rate().is_constant() { None } else { Some(self) }
    }
}

impl ExactDiagonal for SectorGenerator {
    fn weights(&self) -> &[u8] {
        self.dephasing_weights()
    }

    fn integral(&self, t0: f64, t1: f64) -> Result<f64> {
        self.rate().oscillating_integral(t0, t1)
    }
}

impl Representation for SectorGenerator {
    fn len(&self) -> usize {
        self.layout().len()
    }
    fn n_sites(&self) -> usize {
        self.layout().n_sites()
    }
    fn trace(&self, y: &[C64]) -> f64 {
        self.layout().trace(y)
    }
    fn hermiticity_residual(&self, y: &[C64]) -> f64 {
        self.layout().hermiticity_residual(y)
    }
    fn hermitize_normalize(&self, y: &mut [C64]) {
        self.layout().hermitize_normalize(y)
    }
    fn add_populations(&self, y: &[C64], scale: f64, out: &mut [C64]) {
        let mut n = [0.0; crate::operators::DEFAULT_SITE_CAP];
        let n = &mut n[..out.len()];
        self.layout().populations(y, n);
        out.iter_mut().zip(n.iter()).for_each(|(o, v)| *o = C64::from(scale * v));
    }
    fn min_eigenvalue(&self, y: &[C64]) -> f64 {
        self.layout().min_eigenvalue(y)
    }
    fn to_density(&self, y: &[C64]) -> DensityMatrix {
        self.layout().unpack(y)
    }
}

/// Block representation with the dephasing term left in the right-hand
/// side.
struct Plain<'a>(&'a SectorGenerator);

impl OdeSystem for Plain<'_> {
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        SectorGenerator::rhs(self.0, t, y, dy)
    }
}

impl Representation for Plain<'_> {
    fn len(&self) -> usize {
        self.0.len()
    }
    fn n_sites(&self) -> usize {
        Representation::n_sites(self.0)
    }
    fn trace(&self, y: &[C64]) -> f64 {
        self.0.trace(y)
    }
    fn hermiticity_residual(&self, y: &[C64]) -> f64 {
        self.0.hermiticity_residual(y)
    }
    fn hermitize_normalize(&self, y: &mut [C64]) {
        self.0.hermitize_normalize(y)
    }
    fn add_populations(&self, y: &[C64], scale: f64, out: &mut [C64]) {
        self.0.add_populations(y, scale, out)
    }
    fn min_eigenvalue(&self, y: &[C64]) -> f64 {
        self.0.min_eigenvalue(y)
    }
    fn to_density(&self, y: &[C64]) -> DensityMatrix {
        self.0.to_density(y)
    }
}

/// Full density matrix stored column-major.
struct Dense<'a> {
    ctx: &'a GeneratorContext,
}

impl Dense<'_> {
    fn dim(&self) -> usize {
        self.ctx.dim()
    }
    fn matrix(&self, y: &[C64]) -> DMatrix<C64> {
        DMatrix::from_column_slice(self.dim(), self.dim(), &y[..self.len()])
    }
}

impl OdeSystem for Dense<'_> {
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        let (gamma, shift) = self.ctx.coefficients_at(t)?;
        let out = self.ctx.apply_frozen(&self.matrix(y), gamma, shift);
        dy[..self.len()].copy_from_slice(out.as_slice());
        Ok(())
    }
}

impl Representation for Dense<'_> {
    fn len(&self) -> usize {
        self.dim() * self.dim()
    }
    fn n_sites(&self) -> usize {
        self.ctx.spec().n_sites()
    }
    fn trace(&self, y: &[C64]) -> f64 {
        let d = self.dim();
        (0..d).map(|a| y[a * d + a].re).sum()
    }
    fn hermiticity_residual(&self, y: &[C64]) -> f64 {
        hermiticity_residual(&self.matrix(y))
    }
    fn hermitize_normalize(&self, y: &mut [C64]) {
        let d = self.dim();
        for c in 0..d {
            y[c * d + c].im = 0.0;
            for r in c + 1..d {
                let v = 0.5 * (y[c * d + r] + y[r * d + c].conj());
                y[c * d + r] = v;
                y[r * d + c] = v.conj();
            }
        }
        let tr = self.trace(y);
        y[..d * d].iter_mut().for_each(|v| *v /= tr);
    }
    fn add_populations(&self, y: &[C64], scale: f64, out: &mut [C64]) {
        let d = self.dim();
        let n = self.n_sites();
        out.iter_mut().for_each(|o| *o = C64::from(0.0));
        for a in 0..d {
            let p = y[a * d + a].re * scale;
            for (i, o) in out.iter_mut().enumerate() {
                if crate::basis::is_excited(a, n, i + 1) {
                    o.re += p;
                }
            }
        }
    }
    fn min_eigenvalue(&self, y: &[C64]) -> f64 {
        hermitian_eigenvalues(&self.matrix(y))[0]
    }
    fn to_density(&self, y: &[C64]) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(self.matrix(y))
    }
}

/// State vector followed by `N` accumulators integrating `scale · nᵢ(t)`.
struct Averaging<'a, R: ?Sized> {
    rep: &'a R,
    scale: f64,
}

impl<R: Representation + ?Sized> OdeSystem for Averaging<'_, R> {
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        let m = self.rep.len();
        self.rep.rhs(t, &y[..m], &mut dy[..m])?;
        self.rep.add_populations(&y[..m], self.scale, &mut dy[m..]);
        Ok(())
    }

    fn exact_part(&self) -> Option<&dyn ExactDiagonal> {
        self.rep.exact_part()
    }
}

/// Only the state part of an augmented vector, for replays.
struct StateOnly<'a, R: ?Sized>(&'a R);

impl<R: Representation + ?Sized> OdeSystem for StateOnly<'_, R> {
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        self.0.rhs(t, y, dy)
    }

    fn exact_part(&self) -> Option<&dyn ExactDiagonal> {
        self.0.exact_part()
    }
}

/// Advances the augmented state with the per-step invariant checks and
/// corrections.
fn advance<R: Representation + ?Sized>(
    rep: &R,
    sys: &dyn OdeSystem,
    dp: &mut DormandPrince,
    t: &mut f64,
    t_end: f64,
    y: &mut [C64],
    log: &mut InvariantLog,
) -> Result<()> {
    let m = rep.len();
    dp.advance(sys, t, t_end, y, |t, y| {
        let state = &mut y[..m];
        log.step(t, libm::fabs(rep.trace(state) - 1.0), rep.hermiticity_residual(state))?;
        rep.hermitize_normalize(state);
        Ok(())
    })
}

fn populations_of<R: Representation + ?Sized>(rep: &R, y: &[C64]) -> Vec<f64> {
    let mut out = vec![C64::from(0.0); rep.n_sites()];
    rep.add_populations(y, 1.0, &mut out);
    out.iter().map(|v| v.re).collect()
}

fn purity_of(y: &[C64]) -> f64 {
    y.iter().map(|v| v.norm_sqr()).sum()
}

/// Integrates `rho0` from `t0` to `t1`, sampling observables at `samples`
/// (sorted, inside `[t0, t1]`). The state is checked for positivity at each
/// sample.
pub fn evolve(
    ctx: &GeneratorContext,
    rho0: &DensityMatrix,
    t0: f64,
    t1: f64,
    samples: &[f64],
    config: &IntegratorConfig,
) -> Result<TrajectoryResult> {
    config.validate()?;
    if !(t1 >= t0) || samples.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("sample times must be sorted within [t0, t1]".into()));
    }
    if samples.iter().any(|&s| s < t0 || s > t1) {
        return Err(Error::InvalidParameter("sample times must be sorted within [t0, t1]".into()));
    }
    if rho0.dim() != ctx.dim() {
        return Err(Error::InvalidParameter("initial state has the wrong dimension".into()));
    }
    let n = ctx.spec().n_sites();
    if rho0.is_block_diagonal(n, 0.0) {
        let gen = SectorGenerator::new(ctx)?;
        let y = gen.layout().pack(rho0)?;
        if config.exact_dephasing {
            evolve_in(&gen, y, t0, t1, samples, config)
        } else {
            evolve_in(&Plain(&gen), y, t0, t1, samples, config)
        }
    } else {
        let dense = Dense { ctx };
        evolve_in(&dense, rho0.matrix().as_slice().to_vec(), t0, t1, samples, config)
    }
}

fn evolve_in<R: Representation>(
    rep: &R,
    mut y: Vec<C64>,
    t0: f64,
    t1: f64,
    samples: &[f64],
    config: &IntegratorConfig,
) -> Result<TrajectoryResult> {
    let mut dp = DormandPrince::new(y.len(), config.step_control());
    let mut log = InvariantLog::default();
    let mut out = TrajectoryResult {
        times: Vec::with_capacity(samples.len()),
        populations: Vec::with_capacity(samples.len()),
        purity: Vec::with_capacity(samples.len()),
        final_state: DensityMatrix::ground(rep.n_sites()),
        stats: StepStats::default(),
        invariants: InvariantLog::default(),
    };
    let mut t = t0;
    for &s in samples {
        advance(rep, rep, &mut dp, &mut t, s, &mut y, &mut log)?;
        log.checkpoint(t, rep.min_eigenvalue(&y), config.enforce_positivity)?;
        out.times.push(t);
        out.populations.push(populations_of(rep, &y));
        out.purity.push(purity_of(&y));
    }
    advance(rep, rep, &mut dp, &mut t, t1, &mut y, &mut log)?;
    out.final_state = rep.to_density(&y);
    out.stats = dp.stats();
    out.invariants = log;
    Ok(out)
}

/// Averaging window used by [`find_steady_state`] for this context.
pub fn averaging_window(ctx: &GeneratorContext, config: &IntegratorConfig) -> f64 {
    ctx.rate().period().unwrap_or(config.probe_window)
}

/// Periodic steady state reached from the all-ground state.
///
/// Running out of the time budget is not an error: the result then has
/// `converged = false` and carries the last window averages.
pub fn find_steady_state(ctx: &GeneratorContext, config: &IntegratorConfig) -> Result<SteadyStateResult> {
    config.validate()?;
    let spec = ctx.spec();
    if spec.injection().rate == 0.0 && spec.extraction().rate == 0.0 {
        return Err(Error::InvalidParameter("a steady state needs injection or extraction".into()));
    }
    let gen = SectorGenerator::new(ctx)?;
    let window = averaging_window(ctx, config);
    let plain = Plain(&gen);
    let rep: &dyn Representation = if config.exact_dephasing { &gen } else { &plain };
    SteadyStateSolver::new(&gen, rep, window, config, spec.extraction().site).run()
}

/// Windows checked after a fixed-point solve before solving again.
const WINDOWS_PER_SHOT: usize = 4;
/// Largest `h · ρ(L)` for steady-state runs; the real stability boundary of
/// the Dormand–Prince pair is about 3.3.
const STABLE_STEP: f64 = 2.0;
/// Entry magnitude beyond which the orbit is taken to have no bounded
/// attractor (a physical state has `|ρ_ab| ≤ 1`).
const DIVERGENCE_BOUND: f64 = 1e3;
/// Estimated one-window multiplier modulus above which the orbit is
/// reported as diverged without integrating it out.
const UNSTABLE_MULTIPLIER: f64 = 1.0 + 1e-4;
/// Size of the first Krylov cycle, whose Ritz values decide stability.
const PROBE_CYCLE: usize = 60;
/// Krylov subspace size of the fixed-point solve.
const SHOOTING_RESTART: usize = 200;
/// Residual 2-norm at which the fixed-point solve stops.
const SHOOTING_TOL: f64 = 1e-10;

struct SteadyStateSolver<'a> {
    gen: &'a SectorGenerator,
    rep: &'a dyn Representation,
    window: f64,
    config: &'a IntegratorConfig,
    ext_index: usize,
    dp: DormandPrince,
    log: InvariantLog,
    /// Integrated time, replays included.
    spent: f64,
    periods: usize,
    floquet_radius: f64,
}

impl<'a> SteadyStateSolver<'a> {
    fn new(
        gen: &'a SectorGenerator,
        rep: &'a dyn Representation,
        window: f64,
        config: &'a IntegratorConfig,
        ext_site: usize,
    ) -> Self {
        let len = gen.layout().len() + gen.layout().n_sites();
        // Steps at the edge of the stability region leave stiff modes
        // undamped in the window map, which stalls the fixed-point solve.
        // Dephasing integrated exactly does not count.
        let rate = gen.rate();
        let gamma_max = if config.exact_dephasing { libm::fabs(rate.offset()) } else { rate.rate_bound() };
        let radius = gen.spectral_bound(gamma_max, rate.shift_bound());
        let mut control = config.step_control();
        control.max_step = control.max_step.min(STABLE_STEP / radius);
        Self {
            gen,
            rep,
            window,
            config,
            ext_index: ext_site - 1,
            dp: DormandPrince::new(len, control),
            log: InvariantLog::default(),
            spent: 0.0,
            periods: 0,
            floquet_radius: 0.0,
        }
    }

    /// One adaptive window from `t`; returns the window averages.
    fn window(&mut self, t: &mut f64, y: &mut [C64]) -> Result<Vec<f64>> {
        let m = self.gen.layout().len();
        y[m..].iter_mut().for_each(|v| *v = C64::from(0.0));
        let sys = Averaging { rep: self.rep, scale: 1.0 / self.window };
        let t_end = *t + self.window;
        advance(self.rep, &sys, &mut self.dp, t, t_end, y, &mut self.log)?;
        self.log.checkpoint(*t, self.gen.layout().min_eigenvalue(&y[..m]), self.config.enforce_positivity)?;
        self.spent += self.window;
        self.periods += 1;
        Ok(y[m..].iter().map(|v| v.re).collect())
    }

    /// Fixed point `y* = Φ y*` of the replayed map `Φ` over `windows`
    /// windows, from the start state `start` and its image `end`. Solves
    /// `(I − Φ) δ = end − start` on the traceless subspace, where `I − Φ` is
    /// invertible.
    fn shoot(&mut self, schedule: &[(f64, f64)], windows: usize, start: &[C64], end: &[C64]) -> Result<Vec<C64>> {
        let m = start.len();
        let rhs: Vec<C64> = end.iter().zip(start).map(|(e, s)| e - s).collect();
        let mut delta = vec![C64::from(0.0); m];
        let mut stepper = DormandPrince::new(m, self.config.step_control());
        let sys = StateOnly(self.rep);
        let horizon = windows as f64 * self.window;
        let mut replays = 0usize;
        let budget = ((self.config.t_max - self.spent) / horizon).max(0.0) as usize;
        let mut apply = |v: &[C64], out: &mut [C64]| {
            replays += 1;
            out.copy_from_slice(v);
            stepper.replay(&sys, schedule, out)?;
            out.iter_mut().zip(v).for_each(|(o, vi)| *o = vi - *o);
            Ok(())
        };
        // A short first Krylov cycle already resolves the outer spectrum of Φ;
        // an unstable map is reported before the remaining cycles run.
        let first = GmresConfig { restart: PROBE_CYCLE, max_iter: budget.min(PROBE_CYCLE), tol: SHOOTING_TOL };
        let outcome = gmres::solve(&mut apply, &rhs, &mut delta, &first)?;
        // Ritz values θ of I − Φ give multipliers 1 − θ of Φ.
        let radius = outcome.ritz.iter().map(|theta| (C64::from(1.0) - theta).norm()).fold(0.0, f64::max);
        let per_window = libm::pow(radius, 1.0 / windows as f64);
        self.floquet_radius = self.floquet_radius.max(per_window);
        if per_window <= UNSTABLE_MULTIPLIER && !outcome.converged {
            let rest = GmresConfig {
                restart: SHOOTING_RESTART,
                max_iter: budget.saturating_sub(outcome.iterations),
                tol: SHOOTING_TOL,
            };
            // An unconverged solve still gives a better start; the window
            // check decides.
            gmres::solve(&mut apply, &rhs, &mut delta, &rest)?;
        }
        self.spent += replays as f64 * horizon;
        self.periods += replays * windows;
        let mut y: Vec<C64> = start.iter().zip(&delta).map(|(s, d)| s + d).collect();
        self.gen.layout().hermitize_normalize(&mut y);
        Ok(y)
    }

    fn run(mut self) -> Result<SteadyStateResult> {
        let layout = self.gen.layout();
        let m = layout.len();
        let mut y = layout.ground();
        y.resize(m + layout.n_sites(), C64::from(0.0));
        let mut t = 0.0;

        if self.config.window_phase > 0.0 {
            let t_end = self.config.window_phase * self.window;
            advance(self.rep, &StateOnly(self.rep), &mut self.dp, &mut t, t_end, &mut y, &mut self.log)?;
            self.spent += t_end;
        }

        // Short windows make `I − Φ` as ill-conditioned as the generator
        // itself; shooting over several windows damps the fast modes first.
        let shot_windows = libm::ceil(self.config.probe_window / self.window).max(1.0) as usize;
        let mut previous: Option<Vec<f64>> = None;
        let mut since_shot = 0usize;
        let mut shot_start: Option<Vec<C64>> = None;
        let mut recorded = 0usize;
        if self.config.accelerate {
            shot_start = Some(y[..m].to_vec());
            self.dp.start_recording();
        }
        loop {
            let start: Vec<C64> = y[..m].to_vec();
            let averages = self.window(&mut t, &mut y)?;
            let residual = previous.as_ref().map(|prev| {
                let a = averages[self.ext_index];
                let diff = libm::fabs(a - prev[self.ext_index]);
                if diff == 0.0 { 0.0 } else { diff / libm::fabs(a) }
            });
            if let Some(r) = residual {
                if r < self.config.steady_tol {
                    return Ok(self.finish(true, averages, r, &start));
                }
            }
            let diverged = y[..m].iter().any(|v| !(v.norm() <= DIVERGENCE_BOUND));
            if diverged || self.spent + self.window > self.config.t_max {
                let mut result = self.finish(false, averages, residual.unwrap_or(f64::INFINITY), &start);
                result.diverged = diverged;
                return Ok(result);
            }
            previous = Some(averages);
            if let Some(origin) = &shot_start {
                recorded += 1;
                if recorded < shot_windows {
                    continue;
                }
                let schedule = self.dp.take_recording();
                let fixed = self.shoot(&schedule, shot_windows, origin, &y[..m])?;
                if self.floquet_radius > UNSTABLE_MULTIPLIER {
                    let mut result = self.finish(false, previous.take().unwrap_or_else(|| vec![f64::NAN; layout.n_sites()]), f64::INFINITY, &y[..m]);
                    result.diverged = true;
                    return Ok(result);
                }
                y[..m].copy_from_slice(&fixed);
                self.dp.invalidate();
                self.log.checkpoint(t, layout.min_eigenvalue(&y[..m]), self.config.enforce_positivity)?;
                previous = None;
                since_shot = 0;
                shot_start = None;
                recorded = 0;
            } else {
                since_shot += 1;
                if self.config.accelerate && since_shot >= WINDOWS_PER_SHOT {
                    shot_start = Some(y[..m].to_vec());
                    self.dp.start_recording();
                }
            }
        }
    }

    fn finish(self, converged: bool, averages: Vec<f64>, residual: f64, start: &[C64]) -> SteadyStateResult {
        SteadyStateResult {
            converged,
            diverged: false,
            p_ext: averages[self.ext_index],
            populations: averages,
            periods: self.periods,
            window: self.window,
            residual,
            state: self.gen.layout().unpack(start),
            floquet_radius: self.floquet_radius,
            stats: self.dp.stats(),
            invariants: self.log,
        }
    }
}

/// Stationary state of the generator with γ frozen at `gamma`, from the
/// dense superoperator: the trace condition replaces one row of `L ρ = 0`
/// and the system is solved by fully pivoted LU.
pub fn steady_state_nullspace(ctx: &GeneratorContext, gamma: f64) -> Result<DensityMatrix> {
    let n = ctx.spec().n_sites();
    if n > NULLSPACE_SITE_CAP {
        return Err(Error::DimensionCap { n_sites: n, cap: NULLSPACE_SITE_CAP });
    }
    let d = ctx.dim();
    let mut l = build_constant_superoperator(ctx, gamma)?.to_dense();
    for c in 0..d * d {
        l[(0, c)] = C64::from(0.0);
    }
    for a in 0..d {
        l[(0, a * d + a)] = C64::from(1.0);
    }
    let lu = l.full_piv_lu();
    let pivots: Vec<f64> = lu.u().diagonal().iter().map(|v| v.norm()).collect();
    let largest = pivots.iter().copied().fold(0.0, f64::max);
    let small = pivots.iter().filter(|&&p| p <= 1e-12 * largest).count();
    if small > 0 {
        return Err(Error::DegenerateNullSpace { dimension: small + 1 });
    }
    let mut rhs = nalgebra::DVector::zeros(d * d);
    rhs[0] = C64::from(1.0);
    let x = lu.solve(&rhs).ok_or(Error::DegenerateNullSpace { dimension: 2 })?;
    let mut rho = DensityMatrix::from_matrix_unchecked(DMatrix::from_column_slice(d, d, x.as_slice()));
    rho.hermitize();
    rho.normalize();
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{ChainSpec, Port};
    use crate::rate::RateModel;

    fn ctx(n: usize, gamma: f64) -> GeneratorContext {
        let spec = ChainSpec::uniform(n, 1.0, 0.1, Port::new(1, 0.01), Port::new(n, 0.01)).unwrap();
        GeneratorContext::new(spec, RateModel::constant(gamma).unwrap()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::default().validate().is_ok());
        let bad = IntegratorConfig { rtol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = IntegratorConfig { window_phase: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn dense_and_sector_paths_agree() {
        let c = ctx(3, 0.2);
        let cfg = IntegratorConfig::default();
        let ground = DensityMatrix::ground(3);
        let a = evolve(&c, &ground, 0.0, 30.0, &[10.0, 20.0], &cfg).unwrap();
        // A tiny cross-sector coherence forces the dense path.
        let mut m = ground.matrix().clone();
        m[(0, 7)] = C64::from(1e-13);
        m[(7, 0)] = C64::from(1e-13);
        let b = evolve(&c, &DensityMatrix::from_matrix(m).unwrap(), 0.0, 30.0, &[10.0, 20.0], &cfg).unwrap();
        for (pa, pb) in a.populations.iter().zip(&b.populations) {
            for (x, y) in pa.iter().zip(pb) {
                assert!((x - y).abs() < 1e-8, "{x} vs {y}");
            }
        }
        assert!(a.final_state.trace_distance(&b.final_state) < 1e-8);
    }

    #[test]
    fn nullspace_is_stationary() {
        let c = ctx(3, 0.3);
        let rho = steady_state_nullspace(&c, 0.3).unwrap();
        let d = c.apply_rhs(&rho, 0.0).unwrap();
        assert!(d.iter().all(|v| v.norm() < 1e-12));
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nullspace_rejects_closed_chain() {
        let spec = ChainSpec::uniform(2, 1.0, 0.1, Port::new(1, 0.0), Port::new(2, 0.0)).unwrap();
        let c = GeneratorContext::new(spec, RateModel::constant(0.0).unwrap()).unwrap();
        assert!(matches!(steady_state_nullspace(&c, 0.0), Err(Error::DegenerateNullSpace { .. })));
    }

    #[test]
    fn nullspace_site_cap() {
        let c = ctx(6, 0.0);
        assert!(matches!(steady_state_nullspace(&c, 0.0), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn steady_state_without_ports_is_rejected() {
        let spec = ChainSpec::uniform(2, 1.0, 0.1, Port::new(1, 0.0), Port::new(2, 0.0)).unwrap();
        let c = GeneratorContext::new(spec, RateModel::constant(0.0).unwrap()).unwrap();
        assert!(find_steady_state(&c, &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let cfg = IntegratorConfig { t_max: 25.0, accelerate: false, ..Default::default() };
        let r = find_steady_state(&ctx(3, 0.1), &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.periods, 2);
    }
}
