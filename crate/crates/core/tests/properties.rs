use proptest::prelude::*;
use shuffle_sgd::oracles::{
    closed_form_concave_epoch, closed_form_threetype, closed_form_twotype, large_concave_epoch_map,
    OracleParams,
};
use shuffle_sgd::shuffle::is_permutation;
use shuffle_sgd::verify::contraction_suite;
use shuffle_sgd::{
    epoch_order, full_gradient, run, FiniteSumProblem, Matrix, QuadraticComponent, RunConfig,
    ShuffleStrategy,
};

fn scalar_problem(parts: &[(f64, f64)]) -> FiniteSumProblem {
    FiniteSumProblem::new(
        parts
            .iter()
            .map(|&(a, b)| QuadraticComponent::scalar(a, b))
            .collect(),
    )
    .unwrap()
}

fn igd_final(problem: &FiniteSumProblem, eta: f64, epochs: usize, x0: f64) -> f64 {
    run(
        problem,
        &ShuffleStrategy::Igd,
        &RunConfig::new(eta, epochs, vec![x0]),
    )
    .unwrap()
    .final_iterate[0]
}

fn close(oracle: f64, sim: f64, n: usize, k: usize) -> bool {
    (oracle - sim).abs() <= 1e-10 * (n * k) as f64 * sim.abs().max(1e-300)
}

fn random_spd(d: usize, seed: &[f64]) -> Matrix {
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| seed[(i * d + j) % seed.len()]).collect())
        .collect();
    let b = Matrix::from_rows(&rows);
    let mut a = b.matmul(&b.transpose());
    for i in 0..d {
        a[(i, i)] += 0.5;
    }
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn twotype_oracle_matches_runner(a in 0.1f64..10.0, g in 0.1f64..5.0, half in 1usize..=32, k in 1usize..=32,
                                     step in 0.01f64..1.9, x0 in -5.0f64..5.0) {
        let n = 2 * half;
        let eta = step / a;
        let parts: Vec<(f64, f64)> = (0..n).map(|i| (a, if i < half { g } else { -g })).collect();
        let sim = igd_final(&scalar_problem(&parts), eta, k, x0);
        let oracle = closed_form_twotype(&OracleParams { a, g, n, eta, epochs: k, x0 }).unwrap();
        prop_assert!(close(oracle, sim, n, k), "oracle {oracle} sim {sim}");
    }

    #[test]
    fn threetype_oracle_matches_runner(a in 0.1f64..10.0, g in 0.1f64..5.0, half in 1usize..=31, k in 1usize..=32,
                                       step in 0.01f64..1.9, x0 in -5.0f64..5.0) {
        let n = 2 * half + 1;
        let eta = step / a;
        let parts: Vec<(f64, f64)> =
            (0..n).map(|i| (a, if i == 0 { 0.0 } else if i <= half { g } else { -g })).collect();
        let sim = igd_final(&scalar_problem(&parts), eta, k, x0);
        let oracle = closed_form_threetype(&OracleParams { a, g, n, eta, epochs: k, x0 }).unwrap();
        prop_assert!(close(oracle, sim, n, k), "oracle {oracle} sim {sim}");
    }

    #[test]
    fn concave_epoch_matches_one_epoch(a in 0.1f64..10.0, g in 0.1f64..5.0, half in 1usize..=32,
                                       step in 0.01f64..0.5, x0 in -5.0f64..5.0) {
        let n = 2 * half;
        let eta = step / a;
        let parts: Vec<(f64, f64)> = (0..n).map(|i| if i < half { (a, g) } else { (-a / 2.0, -g) }).collect();
        let sim = igd_final(&scalar_problem(&parts), eta, 1, x0);
        let oracle = closed_form_concave_epoch(a, g, n, eta, x0).unwrap();
        prop_assert!(close(oracle, sim, n, 1), "oracle {oracle} sim {sim}");
    }

    #[test]
    fn large_concave_epoch_matches_one_epoch(mu in 0.1f64..2.0, kappa in 4.0f64..100.0, quarter in 1usize..=16,
                                             step in 0.01f64..1.0, g in 0.1f64..5.0, x0 in -5.0f64..5.0) {
        let n = 4 * quarter;
        let ell = kappa * mu;
        let eta = step / ell;
        let parts: Vec<(f64, f64)> = (0..n)
            .map(|i| match i / quarter {
                0 => (0.0, g),
                1 => (ell, 0.0),
                2 => (0.0, -g),
                _ => (-(ell - 4.0 * mu), 0.0),
            })
            .collect();
        let sim = igd_final(&scalar_problem(&parts), eta, 1, x0);
        let oracle = large_concave_epoch_map(mu, ell, n, eta, g, x0).unwrap();
        prop_assert!(close(oracle, sim, n, 1), "oracle {oracle} sim {sim}");
    }

    #[test]
    fn full_gradient_is_mean_of_affine_maps(d in 1usize..=4, n in 1usize..=6,
                                            entries in prop::collection::vec(-1.0f64..1.0, 16),
                                            lin in prop::collection::vec(-3.0f64..3.0, 24),
                                            x in prop::collection::vec(-2.0f64..2.0, 4)) {
        let comps: Vec<QuadraticComponent> = (0..n)
            .map(|i| {
                let shifted: Vec<f64> = entries.iter().map(|e| e + i as f64 * 0.1).collect();
                QuadraticComponent::new(random_spd(d, &shifted), (0..d).map(|j| lin[(i * d + j) % lin.len()]).collect())
            })
            .collect();
        let problem = FiniteSumProblem::new(comps).unwrap();
        let x = &x[..d];
        let g = full_gradient(&problem, x).unwrap();
        for j in 0..d {
            // Central differences are exact on quadratics up to rounding.
            let h = 1e-4;
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let fd = (problem.value(&xp).unwrap() - problem.value(&xm).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[j]).abs() <= 1e-6 * (1.0 + g[j].abs()));
        }
        prop_assert!(full_gradient(&problem, problem.minimizer()).unwrap().iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn random_orders_are_valid(seed in any::<u64>(), n in 1usize..=50, k in 1usize..=20) {
        let rr = ShuffleStrategy::RandomReshuffle { seed };
        prop_assert!(is_permutation(&epoch_order(&rr, k, n), n));
        let ss = ShuffleStrategy::SingleShuffle { seed };
        prop_assert!(is_permutation(&epoch_order(&ss, k, n), n));
        prop_assert_eq!(epoch_order(&ss, k, n), epoch_order(&ss, 1, n));
        let wr = epoch_order(&ShuffleStrategy::WithReplacement { seed }, k, n);
        prop_assert_eq!(wr.len(), n);
        prop_assert!(wr.iter().all(|&i| i < n));
    }

    #[test]
    fn replay_is_bit_identical(seed in any::<u64>(), eta in 0.001f64..0.2) {
        let problem = scalar_problem(&[(1.0, 1.0), (2.0, -0.5), (1.5, -0.5), (0.5, 0.0)]);
        for strategy in [
            ShuffleStrategy::RandomReshuffle { seed },
            ShuffleStrategy::SingleShuffle { seed },
            ShuffleStrategy::WithReplacement { seed },
        ] {
            let cfg = RunConfig::new(eta, 7, vec![3.0]).with_trace();
            prop_assert_eq!(run(&problem, &strategy, &cfg).unwrap(), run(&problem, &strategy, &cfg).unwrap());
        }
    }

    #[test]
    fn gradient_steps_contract(seed in any::<u64>()) {
        prop_assert!(contraction_suite(50, seed).pass());
    }
}

#[test]
fn reshuffled_orders_are_uniform_over_permutations() {
    // All 24 orders of n = 4 over 24 000 epochs; χ² with 23 degrees of
    // freedom has a 0.1% critical value of 49.73.
    let epochs = 24_000;
    let mut counts = std::collections::HashMap::new();
    let strategy = ShuffleStrategy::RandomReshuffle { seed: 7 };
    for k in 1..=epochs {
        *counts.entry(epoch_order(&strategy, k, 4)).or_insert(0usize) += 1;
    }
    assert_eq!(counts.len(), 24);
    let expected = epochs as f64 / 24.0;
    let chi2: f64 = counts
        .values()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    assert!(chi2 < 49.73, "chi2 = {chi2}");
}

#[test]
fn with_replacement_draws_are_uniform() {
    // 10 cells, 9 degrees of freedom, 0.1% critical value 27.88.
    let n = 10;
    let mut counts = vec![0usize; n];
    let strategy = ShuffleStrategy::WithReplacement { seed: 11 };
    for k in 1..=2_000 {
        for i in epoch_order(&strategy, k, n) {
            counts[i] += 1;
        }
    }
    let expected = 2_000.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    assert!(chi2 < 27.88, "chi2 = {chi2}");
}
