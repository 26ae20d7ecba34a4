// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

use core::f64::consts::PI;

use dephase_core::liouvillian::build_constant_superoperator;
use dephase_core::metrics::{
    cp_check_pauli_channels, cp_check_single_channel, markovian_crossover, nm_quantifier, non_markov_report,
    ObservableSet, CP_TOL,
};
use dephase_core::operators::{build_hamiltonian, build_operators};
use dephase_core::quadrature::QuadratureConfig;
use dephase_core::{ChainSpec, DensityMatrix, GeneratorContext, Port, RateModel, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn theta() -> impl Strategy<Value = f64> {
    // Stay clear of the singular angle π/4.
    prop_oneof![0.0..0.7, 0.87..1.5]
}

fn rate_model() -> impl Strategy<Value = RateModel> {
    prop_oneof![
        (-1.0..3.0).prop_map(|g| RateModel::constant(g).unwrap()),
        (0.0..3.0, 0.1..5.0).prop_map(|(g, nu)| RateModel::sine(g, nu).unwrap()),
        (0.0..3.0, 0.1..2.0, 0.1..5.0).prop_map(|(g, g0, nu)| RateModel::offset_sine(g, g0, nu).unwrap()),
        (0.0..3.0, prop::collection::vec(0.1..5.0, 1..4)).prop_map(|(g, nus)| RateModel::sine_sum(g, nus).unwrap()),
        (0.0..3.0, 0.2..2.0, theta()).prop_map(|(g, j, th)| RateModel::nmr(g, j, th).unwrap()),
    ]
}

fn chain(n: usize, kappa_inj: f64, kappa_ext: f64) -> ChainSpec {
    ChainSpec::uniform(n, 1.0, 0.1, Port::new(1, kappa_inj), Port::new(n, kappa_ext)).unwrap()
}

fn hermitian(dim: usize) -> impl Strategy<Value = DMatrix<C64>> {
    prop::collection::vec((-1.0..1.0, -1.0..1.0), dim * dim).prop_map(move |v| {
        let a = DMatrix::from_iterator(dim, dim, v.into_iter().map(|(re, im)| C64::new(re, im)));
        (&a + a.adjoint()) * C64::from(0.5)
    })
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// −min_t γ_osc(t) for the NMR rate. With x = πJt the oscillating part is
/// (πJ/4) s² sin 2x / (1 − s² sin² x), s = sin 2θ, whose extrema sit at
/// tan x = ±1/|cos 2θ|.
fn nmr_crossover(j: f64, theta: f64) -> f64 {
    let s = (2.0 * theta).sin();
    0.25 * PI * j * s * s / (2.0 * theta).cos().abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generator_preserves_hermiticity_and_trace(
        rate in rate_model(),
        rho in hermitian(8),
        t in 0.0..20.0,
    ) {
        let ctx = GeneratorContext::new(chain(3, 0.3, 0.2), rate).unwrap();
        let out = ctx.apply_rhs(&DensityMatrix::from_matrix_unchecked(rho), t).unwrap();
        prop_assert!(max_abs(&(&out - out.adjoint())) <= 1e-12);
        prop_assert!(out.trace().norm() <= 1e-12);
    }

    #[test]
    fn closed_chain_conserves_excitation_number(
        rate in rate_model(),
        rho in hermitian(8),
        t in 0.0..20.0,
    ) {
        let ctx = GeneratorContext::new(chain(3, 0.0, 0.0), rate).unwrap();
        let number = ctx.operators().total_number();
        let out = ctx.apply_rhs(&DensityMatrix::from_matrix_unchecked(rho), t).unwrap();
        let drift = DensityMatrix::from_matrix_unchecked(out).expectation(&number);
        prop_assert!(drift.norm() <= 1e-12, "d⟨N⟩/dt = {drift}");
    }

    #[test]
    fn hamiltonian_commutes_with_number(
        freqs in prop::collection::vec(0.1..2.0, 4),
        couplings in prop::collection::vec(-0.5..0.5, 3),
    ) {
        let spec = ChainSpec::new(freqs, couplings, Port::new(1, 0.01), Port::new(3, 0.01)).unwrap();
        let ops = build_operators(&spec).unwrap();
        let h = build_hamiltonian(&spec, &ops).unwrap();
        prop_assert!(h.add(&h.adjoint().scale(C64::from(-1.0))).max_abs() <= 1e-12);
        prop_assert!(h.commutator(&ops.total_number()).max_abs() <= 1e-12);
    }

    #[test]
    fn superoperator_matches_generator(
        rate in rate_model(),
        rho in hermitian(8),
    ) {
        // The superoperator freezes γ and the shift at t = 0.
        let ctx = GeneratorContext::new(chain(3, 0.3, 0.2), rate).unwrap();
        let gamma = ctx.rate().rate_at(0.0).unwrap();
        let lhs = build_constant_superoperator(&ctx, gamma).unwrap().apply(&rho);
        let rhs = ctx.apply_rhs(&DensityMatrix::from_matrix_unchecked(rho), 0.0).unwrap();
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-12);
    }

    #[test]
    fn quantifier_is_additive(
        rate in rate_model(),
        a in 0.0..5.0,
        ab in 0.1..5.0,
        bc in 0.1..5.0,
    ) {
        let config = QuadratureConfig::default();
        let (b, c) = (a + ab, a + ab + bc);
        let whole = nm_quantifier(&rate, a, c, &config).unwrap();
        let parts = nm_quantifier(&rate, a, b, &config).unwrap() + nm_quantifier(&rate, b, c, &config).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-9 * whole.abs().max(1.0), "{whole} vs {parts}");
        prop_assert!(whole >= 0.0);
    }

    #[test]
    fn pauli_check_with_two_idle_channels_is_the_single_channel_check(
        rate in rate_model(),
        t in 0.01..10.0,
    ) {
        let running = rate.integral(0.0, t).unwrap();
        // Too close to the decision boundary to compare two quadratures.
        prop_assume!(running.abs() > 1e-8);
        let idle = RateModel::constant(0.0).unwrap();
        let config = QuadratureConfig::default();
        let pauli = cp_check_pauli_channels([&rate, &idle, &idle], t, &config).unwrap();
        let single = cp_check_single_channel(&rate, t, &config).unwrap();
        prop_assert_eq!(pauli.valid, running >= CP_TOL);
        prop_assert_eq!(single.integrals.last().copied().unwrap() >= CP_TOL, pauli.valid);
    }

    #[test]
    fn markovian_detection_agrees_with_sign_analysis(rate in rate_model()) {
        let markovian = match &rate {
            RateModel::Constant { gamma } => *gamma >= 0.0,
            RateModel::Sine { gamma, .. } | RateModel::SineSum { gamma, .. } => *gamma == 0.0,
            RateModel::OffsetSine { gamma, gamma0, .. } => {
                prop_assume!((gamma - gamma0).abs() > 1e-3);
                gamma >= gamma0
            }
            RateModel::Nmr { gamma, j, theta } => {
                let edge = nmr_crossover(*j, *theta);
                prop_assume!((gamma - edge).abs() > 1e-3);
                *gamma >= edge
            }
        };
        let horizon = rate.period().unwrap_or(20.0);
        let report = non_markov_report(&rate, horizon, &QuadratureConfig::default()).unwrap();
        prop_assert_eq!(report.is_markovian, markovian);
        prop_assert_eq!(report.quantifier == 0.0, markovian);
    }

    #[test]
    fn nmr_crossover_matches_closed_form(j in 0.2..2.0, theta in theta()) {
        let rate = RateModel::nmr(0.0, j, theta).unwrap();
        let found = markovian_crossover(&rate).unwrap().unwrap();
        prop_assert!((found - nmr_crossover(j, theta)).abs() <= 1e-9 * found.max(1.0), "{found}");
    }

    #[test]
    fn sines_are_completely_positive(
        gamma in 0.0..3.0,
        nus in prop::collection::vec(0.1..5.0, 1..4),
    ) {
        let config = QuadratureConfig::default();
        let single = RateModel::sine(gamma, nus[0]).unwrap();
        let sum = RateModel::sine_sum(gamma, nus).unwrap();
        for rate in [single, sum] {
            prop_assert!(cp_check_single_channel(&rate, 50.0, &config).unwrap().valid);
        }
    }

    #[test]
    fn rescaled_current_is_the_population_over_n(
        populations in prop::collection::vec(0.0..1.0, 5),
        site in 2usize..=5,
    ) {
        let spec = ChainSpec::uniform(5, 1.0, 0.1, Port::new(1, 0.01), Port::new(site, 0.03)).unwrap();
        let obs = ObservableSet::new(populations.clone(), &spec).unwrap();
        prop_assert_eq!(obs.rescaled_current, populations[site - 1] / 5.0);
        prop_assert_eq!(obs.current, 0.03 * populations[site - 1]);
        prop_assert!(obs.spread <= 1.0);
    }
}
