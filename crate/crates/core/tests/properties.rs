use homog_core::statevector::expectation_from_costs;
use homog_core::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn class(kind: u8, n: usize, m: usize) -> ClassSpec {
    match kind % 5 {
        0 => ClassSpec::max_cut_er(n, 0.5).unwrap(),
        1 => ClassSpec::max_e3lin2(n, m).unwrap(),
        2 => ClassSpec::max_kxor(n, m, 2 + (m % 3).min(n - 2)).unwrap(),
        3 => ClassSpec::rand_ksat(n, m, 3).unwrap(),
        _ => ClassSpec::hamming_weight(n).unwrap(),
    }
}

fn any_class() -> impl Strategy<Value = ClassSpec> {
    (0u8..5, 4usize..=12, 1usize..=30).prop_map(|(k, n, m)| class(k, n, m))
}

fn angles(p: usize) -> impl Strategy<Value = Schedule> {
    (
        prop::collection::vec(0.0..std::f64::consts::TAU, p),
        prop::collection::vec(0.0..std::f64::consts::PI, p),
    )
        .prop_map(|(g, b)| Schedule::new(g, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pair_probabilities_sum_to_one(spec in any_class(), frac in 0.0..=1.0f64) {
        let d = (frac * spec.n as f64).round() as usize;
        let pair = pair_probabilities(&spec, d).unwrap();
        prop_assert!((pair.total() - 1.0).abs() < 1e-12);
        prop_assert!(pair.both >= 0.0 && pair.one >= 0.0 && pair.neither >= 0.0);
    }

    #[test]
    fn cost_probabilities_sum_to_one(spec in any_class()) {
        let total: f64 = cost_set(&spec).values().map(|c| cost_probability(&spec, c).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "total {total}");
    }

    #[test]
    fn table_sum_rules_and_detailed_balance(spec in any_class()) {
        let r = precompute_all(&spec).unwrap().residuals();
        prop_assert!(r.row_sum < 1e-9, "{r:?}");
        prop_assert!(r.total < 1e-9, "{r:?}");
        prop_assert!(r.detailed_balance < 1e-9, "{r:?}");
    }

    #[test]
    fn joint_marginal_is_cost_probability(spec in any_class(), frac in 0.0..=1.0f64) {
        let d = (frac * spec.n as f64).round() as usize;
        for cp in cost_set(&spec).values() {
            let marginal: f64 = cost_set(&spec)
                .values()
                .map(|c| joint_cost_probability(&spec, cp, c, d).unwrap())
                .sum();
            let p = cost_probability(&spec, cp).unwrap();
            prop_assert!((marginal - p).abs() < 1e-10, "c'={cp} d={d}: {marginal} vs {p}");
        }
    }

    #[test]
    fn global_flip_preserves_even_parity_costs(n in 2usize..=12, seed in any::<u64>(), even in any::<bool>()) {
        let spec = if even {
            ClassSpec::max_kxor(n.max(4), 3 * n, 2 + 2 * (n % 2) ).unwrap()
        } else {
            ClassSpec::max_cut_er(n, 0.5).unwrap()
        };
        let instance = generate_instance(&spec, seed).unwrap();
        let costs = instance.cost_table().unwrap();
        let mask = costs.len() - 1;
        for (x, &c) in costs.iter().enumerate() {
            prop_assert_eq!(c, costs[x ^ mask]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn layer_zero_pseudo_norm_is_one(spec in any_class()) {
        let table = precompute_all(&spec).unwrap();
        let norm = HomogState::initial(&table).pseudo_norm(&table);
        prop_assert!((norm - 1.0).abs() < 1e-12, "norm {norm}");
    }

    #[test]
    fn zero_gamma_keeps_moduli(spec in any_class(), betas in prop::collection::vec(0.0..3.2f64, 1..4)) {
        let table = precompute_all(&spec).unwrap();
        let mut state = HomogState::initial(&table);
        let start: Vec<f64> = state.q.iter().map(|q| q.norm()).collect();
        for beta in betas {
            state = evolve_step(&state, &table, 0.0, beta).unwrap();
            for (q, s) in state.q.iter().zip(&start) {
                prop_assert!((q.norm() - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn evolve_step_is_linear(
        spec in any_class(),
        gamma in 0.0..6.3f64,
        beta in 0.0..3.2f64,
        a in (-2.0..2.0f64, -2.0..2.0f64),
        seed in any::<u64>(),
    ) {
        let table = precompute_all(&spec).unwrap();
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut random_state = || {
            let mut st = HomogState::initial(&table);
            for (c, q) in st.q.iter_mut().enumerate() {
                *q = if table.is_reachable(c) { Complex64::new(next(), next()) } else { Complex64::new(0.0, 0.0) };
            }
            st
        };
        let u = random_state();
        let v = random_state();
        let alpha = Complex64::new(a.0, a.1);
        let mut mixed = u.clone();
        for (m, q) in mixed.q.iter_mut().zip(&v.q) {
            *m = alpha * *m + q;
        }
        let lhs = evolve_step(&mixed, &table, gamma, beta).unwrap();
        let eu = evolve_step(&u, &table, gamma, beta).unwrap();
        let ev = evolve_step(&v, &table, gamma, beta).unwrap();
        let scale = lhs.q.iter().map(|q| q.norm()).fold(1e-300, f64::max);
        for i in 0..lhs.q.len() {
            let rhs = alpha * eu.q[i] + ev.q[i];
            prop_assert!((lhs.q[i] - rhs).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn statevector_norm_is_preserved(n in 1usize..=10, seed in any::<u64>(), schedule in angles(3)) {
        let instance = generate_instance(&ClassSpec::max_cut_er(n.max(2), 0.5).unwrap(), seed).unwrap();
        let state = qaoa_state(&instance, &schedule).unwrap();
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn expectation_ignores_global_phase(seed in any::<u64>(), schedule in angles(2), phase in 0.0..6.3f64) {
        let instance = generate_instance(&ClassSpec::max_e3lin2(7, 9).unwrap(), seed).unwrap();
        let costs = instance.cost_table().unwrap();
        let state = qaoa_state(&instance, &schedule).unwrap();
        let mut rotated = state.clone();
        let w = Complex64::from_polar(1.0, phase);
        for a in &mut rotated.amplitudes {
            *a *= w;
        }
        let e0 = expectation_from_costs(&costs, &state);
        let e1 = expectation_from_costs(&costs, &rotated);
        prop_assert!((e0 - e1).abs() < 1e-12);
    }
}

fn small_table() -> DistributionTable {
    precompute_all(&ClassSpec::max_cut_er(8, 0.5).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn ramp_and_full_parameterizations_agree(
        ramp in (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64),
        p in 1usize..=8,
    ) {
        let table = small_table();
        let ramp = [ramp.0, ramp.1, ramp.2, ramp.3];
        let full = Parameterization::LinearRamp4.expand(&ramp, p).unwrap();
        let flat: Vec<f64> = full.gammas.iter().chain(&full.betas).copied().collect();
        let a = homogeneous_objective(&ramp, &table, p, Parameterization::LinearRamp4, false).unwrap();
        let b = homogeneous_objective(&flat, &table, p, Parameterization::Full2p, false).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn search_never_ends_below_its_start(
        start in (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64),
        minimize in any::<bool>(),
    ) {
        let table = small_table();
        let spec = table.spec.clone();
        let mut options = OptimizerOptions::for_class(&spec, Parameterization::LinearRamp4)
            .with_initial(InitialPoint::Ramp(LinearRamp::new(start.0, start.1, start.2, start.3)));
        options.maximize = !minimize;
        let x0 = [start.0, start.1, start.2, start.3];
        let f0 = homogeneous_objective(&x0, &table, 3, Parameterization::LinearRamp4, false).unwrap();
        let result = heuristic_with_table(&table, 3, &options).unwrap();
        if minimize {
            prop_assert!(result.objective <= f0);
        } else {
            prop_assert!(result.objective >= f0);
        }
        let fresh = homogeneous_objective(&result.params(), &table, 3, Parameterization::LinearRamp4, false).unwrap();
        prop_assert!((fresh - result.objective).abs() < 1e-9);
    }

    #[test]
    fn central_differences_are_stable(x in prop::collection::vec(0.05..3.0f64, 4)) {
        let table = small_table();
        let f = |v: &[f64]| homogeneous_objective(v, &table, 2, Parameterization::Full2p, false).unwrap();
        let grad = |h: f64| -> Vec<f64> {
            (0..x.len())
                .map(|i| {
                    let mut up = x.clone();
                    let mut down = x.clone();
                    up[i] += h;
                    down[i] -= h;
                    (f(&up) - f(&down)) / (2.0 * h)
                })
                .collect()
        };
        let g = grad(1e-5);
        let half = grad(5e-6);
        let scale = half.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (a, b) in g.iter().zip(&half) {
            prop_assert!((a - b).abs() <= 1e-3 * scale.max(1e-9), "{g:?} vs {half:?}");
        }
    }
}

#[test]
fn optimization_is_deterministic() {
    let table = small_table();
    let options = OptimizerOptions::for_class(&table.spec, Parameterization::Full2p);
    let a = heuristic_with_table(&table, 3, &options).unwrap();
    let b = heuristic_with_table(&table, 3, &options).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    let starts = seeded_ramps(9, 4);
    let a = heuristic_multistart(&table, 3, &options, &starts).unwrap();
    let b = heuristic_multistart(&table, 3, &options, &seeded_ramps(9, 4)).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}
