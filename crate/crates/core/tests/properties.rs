//! Cross-module invariants, checked on random models.

use proptest::prelude::*;
use ruinkit_core::edpf::{capped_deficit, capped_increment, indicator};
use ruinkit_core::edvci::{classical_edvci, delta, xi};
use ruinkit_core::quad::gauss_legendre;
use ruinkit_core::scale::default_grid;
use ruinkit_core::tilt::{h_density, overshoot_law_at_tau};
use ruinkit_core::{tilt_model, Analysis, Grid, LevyMeasure, LevyModel, PenaltySpec, ScaleFunctions};

fn exp_model(c: f64, sigma: f64, lambda: f64, mu: f64) -> LevyModel {
    LevyModel::new(c, sigma, LevyMeasure::exponential(lambda, mu).unwrap()).unwrap()
}

fn any_measure() -> impl Strategy<Value = LevyMeasure> {
    prop_oneof![
        (0.3f64..2.0, 0.5f64..2.0).prop_map(|(l, m)| LevyMeasure::exponential(l, m).unwrap()),
        (0.3f64..2.0, 1.0f64..4.0, 0.5f64..3.0).prop_map(|(l, k, r)| LevyMeasure::gamma(l, k, r).unwrap()),
        (0.3f64..2.0, 0.0f64..1.0, 0.2f64..2.0).prop_map(|(l, a, w)| LevyMeasure::uniform(l, a, a + w).unwrap()),
    ]
}

/// Safety loading in `1.2..3`, volatility in `0..1.5`.
fn any_model() -> impl Strategy<Value = LevyModel> {
    (any_measure(), 1.2f64..3.0, 0.0f64..1.5).prop_map(|(m, load, sigma)| {
        let c = load * m.mean();
        LevyModel::new(c, sigma, m).unwrap()
    })
}

/// `∫_0^end f` with panels halving towards 0, where the tail of a gamma law
/// behaves like `y^shape`.
fn graded_integral(f: impl Fn(f64) -> f64, end: f64) -> f64 {
    let first = end / 64.0;
    let mut total = gauss_legendre(&f, first, end, 4096);
    let mut right = first;
    for _ in 0..60 {
        total += gauss_legendre(&f, 0.5 * right, right, 4);
        right *= 0.5;
    }
    total + right * f(0.0)
}

/// Coarse grid keeping each case fast.
fn coarse(m: &LevyModel) -> Grid {
    Grid::covering_with(40.0 * m.measure().mean_jump().max(0.5), 2048).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tail_integrates_to_mean(m in any_measure()) {
        let integral = match m {
            // the tail is piecewise linear with kinks at the support ends
            LevyMeasure::Uniform { lower, upper, .. } => {
                gauss_legendre(|y| m.tail(y), 0.0, lower, 4) + gauss_legendre(|y| m.tail(y), lower, upper, 4)
            }
            _ => graded_integral(|y| m.tail(y), 100.0 * m.mean_jump()),
        };
        prop_assert!((integral - m.mean()).abs() < 1e-8 * m.mean());
    }

    #[test]
    fn untilted_ladder_density_is_tail_over_premium(m in any_model()) {
        let grid = coarse(&m);
        let h = h_density(&tilt_model(&m, 0.0).unwrap(), grid);
        for (i, v) in h.values().iter().enumerate() {
            let exact = m.measure().tail(grid.node(i)) / m.c();
            prop_assert!((v - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn survival_is_monotone_and_bounded(m in any_model()) {
        let s = ScaleFunctions::new(&m, 0.0, coarse(&m)).unwrap();
        prop_assert!(s.tail_bound < 1e-12);
        let v = s.pk_survival();
        prop_assert!(v.values().windows(2).all(|w| w[1] >= w[0] - 1e-12));
        prop_assert!(v.values().iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn survival_falls_with_claim_rate(lambda in 0.3f64..1.0, bump in 0.05f64..0.4, sigma in 0.0f64..1.0) {
        let grid = Grid::covering_with(40.0, 2048).unwrap();
        let a = ScaleFunctions::new(&exp_model(1.5, sigma, lambda, 1.0), 0.0, grid).unwrap();
        let b = ScaleFunctions::new(&exp_model(1.5, sigma, lambda + bump, 1.0), 0.0, grid).unwrap();
        for (x, y) in a.pk_survival().values().iter().zip(b.pk_survival().values()) {
            prop_assert!(y <= &(x + 1e-12));
        }
    }

    #[test]
    fn tilted_scale_function_reaches_its_limit(m in any_model(), q in 0.0f64..2.0) {
        let s = ScaleFunctions::new(&m, q, default_grid(&m, 1.0).unwrap()).unwrap();
        if s.warning.is_none() {
            let limit = s.w_phi_limit();
            prop_assert!((s.scale_function_tilted().last() - limit).abs() < 1e-3 * limit);
        }
    }

    #[test]
    fn discounted_first_record_law_has_mass_xi(c in 1.2f64..3.0, sigma in 0.0f64..1.5, q in 0.2f64..2.0) {
        let m = exp_model(c, sigma, 1.0, 1.0);
        let t = tilt_model(&m, q).unwrap();
        let law = overshoot_law_at_tau(&t, default_grid(&m, 1.0).unwrap()).unwrap();
        let mass = law.exp_weight(t.phi).mass();
        prop_assert!((mass - xi(&m, q).unwrap()).abs() < 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn undoing_the_tilt_gives_kappa(m in any_model(), q in 0.1f64..1.5) {
        let grid = coarse(&m);
        let a = Analysis::new(&m, q, grid).unwrap();
        let x = grid.node(grid.intervals() / 40);
        let law = a.overshoot_dist_tx(x).unwrap();
        let undone = law.tilted.exp_weight(a.phi()).scale((a.phi() * x).exp()).mass();
        let kappa = a.kappa(x).unwrap();
        prop_assert!((undone - kappa).abs() < 1e-3 * kappa);
    }

    #[test]
    fn extended_edpf_is_monotone_in_the_penalties(
        m in any_model(), q in 0.2f64..1.5, k1 in 0.2f64..2.0, dk in 0.0f64..2.0,
    ) {
        let grid = coarse(&m);
        let a = Analysis::new(&m, q, grid).unwrap();
        let x = grid.node(grid.intervals() / 40);
        let small = a.extended_edpf(x, &PenaltySpec::stationary(capped_deficit(k1), capped_increment(k1))).unwrap();
        let large = a
            .extended_edpf(x, &PenaltySpec::stationary(capped_deficit(k1 + dk), capped_increment(k1 + dk)))
            .unwrap();
        prop_assert!(small.value >= 0.0 && small.classic >= 0.0);
        prop_assert!(small.tail_bound < 1e-10);
        prop_assert!(large.value >= small.value - 1e-9);
    }

    #[test]
    fn edvci_splits_into_ruin_and_record_parts(m in any_model(), q in 0.05f64..2.0) {
        let grid = coarse(&m);
        let a = Analysis::new(&m, q, grid).unwrap();
        for i in [0, 10, 50] {
            let r = a.edvci(grid.node(i)).unwrap();
            let records = r.delta / (1.0 - r.xi) * r.kappa;
            prop_assert!((r.V - r.varphi - records).abs() <= 4.0 * f64::EPSILON * r.V);
            prop_assert!(r.V >= 0.0 && r.kappa <= 1.0);
        }
    }

    #[test]
    fn edvci_falls_with_surplus_and_discount(m in any_model(), q in 0.05f64..1.5, dq in 0.05f64..1.0) {
        let grid = coarse(&m);
        let a = Analysis::new(&m, q, grid).unwrap();
        let b = Analysis::new(&m, q + dq, grid).unwrap();
        let mut prev = f64::INFINITY;
        for i in (0..=200).step_by(10) {
            let x = grid.node(i);
            let v = a.edvci(x).unwrap().V;
            prop_assert!(v <= prev + 1e-9);
            prop_assert!(b.edvci(x).unwrap().V <= v + 1e-9);
            prev = v;
        }
    }

    #[test]
    fn classical_paths_agree(c in 1.2f64..3.0, lambda in 0.3f64..1.0, q in 0.1f64..2.0) {
        let m = exp_model(c, 0.0, lambda, 1.0);
        let grid = coarse(&m);
        let a = Analysis::new(&m, q, grid).unwrap();
        for i in [0, 16, 64] {
            let x = grid.node(i);
            let v = a.edvci(x).unwrap().V;
            prop_assert!((v - classical_edvci(&m, q, x, grid).unwrap()).abs() < 1e-10);
        }
    }
}

#[test]
fn indicator_penalty_prices_ruin_by_a_claim() {
    // with w = 1 on positive deficits the penalty function is κ minus its creeping part
    let m = exp_model(1.5, 1.0, 1.0, 1.0);
    let a = Analysis::for_surplus(&m, 0.5, 1.0).unwrap();
    let by_claim = a.classic_edpf(1.0, &indicator()).unwrap();
    let creep = a.overshoot_dist_tx(1.0).unwrap().discounted.atom();
    assert!((by_claim + creep - a.kappa(1.0).unwrap()).abs() < 1e-3);
}

#[test]
fn increment_law_moments_hold_across_measures() {
    for m in [
        LevyModel::new(2.0, 0.5, LevyMeasure::gamma(1.0, 2.0, 2.0).unwrap()).unwrap(),
        LevyModel::new(1.0, 0.8, LevyMeasure::uniform(1.0, 0.0, 1.0).unwrap()).unwrap(),
    ] {
        let a = Analysis::for_surplus(&m, 0.7, 1.0).unwrap();
        let j = a.increment_law().unwrap();
        let g = a.grid();
        let first: Vec<f64> = j.values().iter().enumerate().map(|(i, d)| d * g.node(i)).collect();
        let mean = ruinkit_core::quad::trapezoid(&first, g.step());
        assert!((j.mass() - xi(&m, 0.7).unwrap()).abs() < 1e-4);
        assert!((mean - delta(&m, 0.7).unwrap()).abs() < 1e-4);
    }
}
