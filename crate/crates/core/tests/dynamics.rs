// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

use dephase_core::evolution::{evolve, find_steady_state, steady_state_nullspace};
use dephase_core::integrate::{DormandPrince, StepControl};
use dephase_core::{ChainSpec, DensityMatrix, GeneratorContext, IntegratorConfig, Port, RateModel, Result, C64};
use nalgebra::DMatrix;

fn context(spec: ChainSpec, rate: RateModel) -> GeneratorContext {
    GeneratorContext::new(spec, rate).unwrap()
}

fn uniform(n: usize, inj: f64, ext_site: usize, ext: f64) -> ChainSpec {
    ChainSpec::uniform(n, 1.0, 0.1, Port::new(1, inj), Port::new(ext_site, ext)).unwrap()
}

#[test]
fn single_site_fills_exponentially() {
    let kappa = 0.37;
    let spec = ChainSpec::uniform(1, 1.0, 0.0, Port::new(1, kappa), Port::new(1, 0.0)).unwrap();
    let ctx = context(spec, RateModel::sine(0.8, 1.3).unwrap());
    let samples = [0.5, 1.0, 2.0, 5.0, 10.0];
    let run = evolve(&ctx, &DensityMatrix::ground(1), 0.0, 10.0, &samples, &IntegratorConfig::default()).unwrap();
    for (t, n) in run.times.iter().zip(&run.populations) {
        let exact = 1.0 - (-kappa * t).exp();
        assert!((n[0] - exact).abs() < 1e-8, "t = {t}: {} vs {exact}", n[0]);
    }
}

#[test]
fn unitary_flow_keeps_a_pure_state_pure() {
    let spec = uniform(3, 0.0, 3, 0.0);
    let ctx = context(spec, RateModel::constant(0.0).unwrap());
    // Coherent superposition of the ground state and a one-excitation state.
    let mut psi = vec![C64::from(0.0); 8];
    psi[7] = C64::from(0.6);
    psi[3] = C64::new(0.0, 0.8);
    let rho0 = DensityMatrix::pure(&psi);
    let samples: Vec<f64> = (1..=20).map(|k| 5.0 * k as f64).collect();
    // Zero eigenvalues sit at the positivity threshold, so integrate tightly.
    let config = IntegratorConfig { rtol: 1e-10, atol: 1e-12, ..IntegratorConfig::default() };
    let run = evolve(&ctx, &rho0, 0.0, 100.0, &samples, &config).unwrap();
    for p in &run.purity {
        assert!((p - 1.0).abs() < 1e-7, "purity {p}");
    }
}

#[test]
fn halving_rtol_moves_the_state_less_than_the_tolerance() {
    let ctx = context(uniform(3, 0.05, 2, 0.05), RateModel::sine(0.7, 2.0).unwrap());
    let rho0 = DensityMatrix::ground(3);
    let run = |rtol: f64| {
        let config = IntegratorConfig { rtol, atol: 1e-3 * rtol, ..IntegratorConfig::default() };
        evolve(&ctx, &rho0, 0.0, 30.0, &[], &config).unwrap().final_state
    };
    let rtol = 1e-6;
    let gap = run(rtol).trace_distance(&run(0.5 * rtol));
    assert!(gap < rtol, "{gap}");
}

#[test]
fn nothing_injected_means_no_current() {
    let ctx = context(uniform(4, 0.0, 3, 0.01), RateModel::constant(0.2).unwrap());
    let ss = find_steady_state(&ctx, &IntegratorConfig::default()).unwrap();
    assert!(ss.converged);
    assert!(ss.p_ext.abs() < 1e-14, "{}", ss.p_ext);
}

#[test]
fn stationary_injection_balances_extraction() {
    for gamma in [0.0, 0.3] {
        let ctx = context(uniform(3, 0.02, 2, 0.05), RateModel::constant(gamma).unwrap());
        let rho = steady_state_nullspace(&ctx, gamma).unwrap();
        let number = ctx.operators().total_number();
        let flow = |m: DMatrix<C64>| DensityMatrix::from_matrix_unchecked(m).expectation(&number).re;
        let inflow = flow(ctx.injection_term(rho.matrix()));
        let outflow = flow(ctx.extraction_term(rho.matrix()));
        assert!(inflow > 0.0);
        assert!((inflow + outflow).abs() < 1e-10, "{inflow} vs {outflow}");
        assert!(rho.min_eigenvalue() >= -1e-10);
    }
}

#[test]
fn integrated_and_algebraic_steady_states_agree() {
    for n in [2, 3] {
        let ext = if n == 2 { 2 } else { n - 1 };
        for gamma in [0.0, 0.05, 0.5] {
            let ctx = context(uniform(n, 0.01, ext, 0.01), RateModel::constant(gamma).unwrap());
            let ss = find_steady_state(&ctx, &IntegratorConfig::default()).unwrap();
            assert!(ss.converged);
            let exact = steady_state_nullspace(&ctx, gamma).unwrap();
            let gap = ss.state.trace_distance(&exact);
            assert!(gap <= 1e-8, "N = {n}, γ = {gamma}: {gap}");
            assert!((0.0..=1.0).contains(&ss.p_ext));
        }
    }
}

#[test]
fn fixed_step_error_shows_fifth_order() {
    // Closed dimer started in a one-excitation superposition.
    let ctx = context(uniform(2, 0.0, 2, 0.0), RateModel::constant(0.0).unwrap());
    let sys = |t: f64, y: &[C64], dy: &mut [C64]| -> Result<()> {
        let rho = DensityMatrix::from_matrix_unchecked(DMatrix::from_column_slice(4, 4, y));
        dy.copy_from_slice(ctx.apply_rhs(&rho, t)?.as_slice());
        Ok(())
    };
    let psi = [C64::from(0.0), C64::from(0.8), C64::new(0.0, 0.6), C64::from(0.0)];
    let y0 = DensityMatrix::pure(&psi).into_matrix();
    let run = |steps: usize| {
        let h = 20.0 / steps as f64;
        let schedule: Vec<_> = (0..steps).map(|k| (k as f64 * h, h)).collect();
        let mut dp = DormandPrince::new(16, StepControl::default());
        let mut y = y0.as_slice().to_vec();
        dp.replay(&sys, &schedule, &mut y).unwrap();
        y
    };
    let reference = run(4000);
    let error = |steps: usize| {
        run(steps).iter().zip(&reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    };
    let ratio = error(40) / error(80);
    assert!((24.0..40.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn periodic_average_does_not_depend_on_the_window_phase() {
    let ctx = context(ChainSpec::benchmark(5).unwrap(), RateModel::sine(0.5, 2.0).unwrap());
    let run = |window_phase: f64| {
        // The literal sine rate drives the state slightly out of the positive
        // cone, so only record the eigenvalue minimum.
        let config = IntegratorConfig { window_phase, enforce_positivity: false, ..IntegratorConfig::default() };
        let ss = find_steady_state(&ctx, &config).unwrap();
        assert!(ss.converged && !ss.diverged);
        ss.p_ext / 7.0
    };
    let (a, b) = (run(0.0), run(1.0 / 3.0));
    assert!((a - b).abs() <= 1e-7, "{a} vs {b}");
}
