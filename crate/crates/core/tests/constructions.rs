use std::f64::consts::PI;

use shuffle_sgd::audit::audit_assumptions;
use shuffle_sgd::constructions::{
    aggregate_dimensions, build, compute_u0_v0, concave_block, large_concave_block, rotated_block,
    scalar_block, ConstructionBundle, ConstructionSpec,
};
use shuffle_sgd::linalg::{rotation, Matrix};
use shuffle_sgd::oracles::large_concave_pq;
use shuffle_sgd::{optimality_gap, run, RunConfig, ShuffleStrategy, TheoremId};

fn spec(t: TheoremId, n: usize, kappa: f64, k: usize) -> ConstructionSpec {
    ConstructionSpec::new(t, n, kappa, k, 1.0, 1.0)
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

fn sample_bundles() -> Vec<ConstructionBundle> {
    vec![
        build(&spec(TheoremId::SmallLbIdhess, 8, 40.0, 10)).unwrap(),
        build(&spec(TheoremId::SmallLbIdhess, 5, 40.0, 10)).unwrap(),
        build(&spec(TheoremId::SmallLbSc, 12, 1e3, 5)).unwrap(),
        build(&spec(TheoremId::SmallLbConcave, 20, 400.0, 10).with_d(1.0)).unwrap(),
        build(&spec(TheoremId::SmallLbConcave, 9, 400.0, 10).with_d(1.0)).unwrap(),
        build(&spec(TheoremId::LargeLbIdhess, 6, 10.0, 20)).unwrap(),
        build(&spec(TheoremId::LargeLbIdhess, 7, 10.0, 20)).unwrap(),
        build(&spec(TheoremId::LargeLbConcave, 8, 8.0, 25)).unwrap(),
        build(&spec(TheoremId::LargeLbConcave, 10, 10.0, 32)).unwrap(),
    ]
}

#[test]
fn idhess_even_split_is_x_squared_plus_minus_x() {
    let b = build(&spec(TheoremId::SmallLbIdhess, 2, 4.0, 2)).unwrap();
    let block = &b.per_dimension[1].problem;
    assert_eq!(block.components()[0].hessian, Matrix::scalar(2.0));
    assert_eq!(block.components()[0].linear, vec![1.0]);
    assert_eq!(block.components()[1].hessian, Matrix::scalar(2.0));
    assert_eq!(block.components()[1].linear, vec![-1.0]);
    assert_eq!(b.problem.dim(), 3);
}

#[test]
fn idhess_bundle_has_identical_hessians_and_zero_p() {
    let b = build(&spec(TheoremId::SmallLbIdhess, 6, 40.0, 10)).unwrap();
    let audit = audit_assumptions(&b.problem);
    assert!(audit.identical_hessians);
    assert_eq!(audit.p_measured, 0.0);
    assert_eq!(
        b.problem.components()[0].hessian,
        Matrix::diag(&[1.0, 10.0, 40.0])
    );
}

#[test]
fn idhess_odd_split_has_offset_free_first_component() {
    let b = build(&spec(TheoremId::SmallLbIdhess, 3, 4.0, 2)).unwrap();
    let linear: Vec<f64> = b.per_dimension[1]
        .problem
        .components()
        .iter()
        .map(|c| c.linear[0])
        .collect();
    assert_eq!(linear, vec![0.0, 1.0, -1.0]);
}

#[test]
fn rotated_second_component_swaps_axes() {
    // μ = 1, L′ = 2, n = 4: a quarter turn maps diag(1, 2) to diag(2, 1).
    let p = rotated_block(1.0, 4.0, 1.0, 4).unwrap();
    let h = &p.components()[1].hessian;
    assert!(h.sub(&Matrix::diag(&[2.0, 1.0])).max_abs() < 1e-15);
    let grad = p.components()[1].gradient(&[1.0, 0.0]);
    assert!((grad[0] - 2.0).abs() < 1e-15 && (grad[1] + 1.0).abs() < 1e-15);
}

#[test]
fn rotated_block_averages_to_scaled_identity() {
    for n in 3..=60 {
        let p = rotated_block(1.0, 50.0, 1.0, n).unwrap();
        let target = Matrix::identity(2).scale((1.0 + 25.0) / 2.0);
        assert!(p.avg_hessian().sub(&target).max_abs() < 1e-12, "n = {n}");
        assert!(p.avg_linear().iter().all(|v| v.abs() < 1e-12), "n = {n}");
        for c in p.components() {
            let eig = shuffle_sgd::linalg::sym_eigenvalues(&c.hessian);
            assert!(eig[0] >= 1.0 - 1e-12 && eig[1] <= 50.0 * (1.0 + 1e-12));
        }
    }
}

#[test]
fn small_lb_sc_is_four_dimensional() {
    let b = build(&spec(TheoremId::SmallLbSc, 1000, 1e4, 20)).unwrap();
    assert_eq!(b.problem.dim(), 4);
    assert_eq!(b.regimes.len(), 3);
    // nK ≤ κ/2 puts 1/(μnK) above 2/L and empties the middle interval.
    let b = build(&spec(TheoremId::SmallLbSc, 100, 1e4, 20)).unwrap();
    assert_eq!(b.problem.dim(), 4);
    assert_eq!(b.regimes.len(), 2);
    assert!(b.notes.iter().any(|s| s.contains("empty")));
}

#[test]
fn polygon_start_signs_monotonicity_and_ratio() {
    let (mu, kappa, n, k) = (1.0, 1e4, 1000usize, 20usize);
    let ell = kappa * mu;
    let grid = log_grid(
        1.0 / (mu * n as f64 * k as f64),
        2.0 / ell * (1.0 - 1e-9),
        50,
    );
    let mut prev = 0.0;
    for &eta in &grid {
        let s = compute_u0_v0(eta, mu, ell, n, 1.0);
        assert!(s.signs_guaranteed);
        assert!(s.u0 > 0.0 && s.v0 < 0.0, "eta = {eta}");
        assert!(s.u0 >= prev);
        assert!(s.v0.abs() <= 8.0 * PI * k as f64 / kappa * s.u0);
        prev = s.u0;
    }
    assert!(!compute_u0_v0(3.0 / ell, mu, ell, n, 1.0).signs_guaranteed);
}

#[test]
fn polygon_epoch_closes_and_rotates() {
    let (mu, ell, n, k) = (1.0, 1e4, 1000usize, 20usize);
    let block = rotated_block(mu, ell, 1.0, n).unwrap();
    let r1 = rotation(2.0 * PI / n as f64);
    for eta in log_grid(1.0 / (mu * (n * k) as f64), 2.0 / ell * (1.0 - 1e-9), 12) {
        let s = compute_u0_v0(eta, mu, ell, n, 1.0);
        let rec = run(
            &block,
            &ShuffleStrategy::Igd,
            &RunConfig::new(eta, 1, vec![s.u0, s.v0]).with_trace(),
        )
        .unwrap();
        let trace = rec.full_trace.unwrap();
        let start = &trace[0];
        let r = start[0].hypot(start[1]);
        let end = &trace[n];
        assert!((end[0] - start[0]).hypot(end[1] - start[1]) <= 1e-9 * r);
        for w in trace.windows(2) {
            let rotated = r1.mul_vec(&w[0]);
            assert!((rotated[0] - w[1][0]).hypot(rotated[1] - w[1][1]) <= 1e-9 * r);
        }
    }
}

#[test]
fn concave_block_components_and_average() {
    let p = concave_block(8.0, 1.0, 4).unwrap();
    let parts: Vec<(f64, f64)> = p
        .components()
        .iter()
        .map(|c| (c.hessian[(0, 0)], c.linear[0]))
        .collect();
    assert_eq!(
        parts,
        vec![(8.0, 1.0), (8.0, 1.0), (-4.0, -1.0), (-4.0, -1.0)]
    );
    // F₂ = L/8·x², so the averaged Hessian is L/4.
    assert_eq!(p.avg_hessian()[(0, 0)], 2.0);
    for n in [4, 6, 10, 100] {
        assert_eq!(
            concave_block(16.0, 1.0, n).unwrap().avg_hessian()[(0, 0)],
            4.0
        );
    }
}

#[test]
fn concave_bundle_has_p_three() {
    let b = build(&spec(TheoremId::SmallLbConcave, 20, 400.0, 10).with_d(1.0)).unwrap();
    let audit = audit_assumptions(&b.problem);
    assert!(
        (audit.p_measured - 3.0).abs() < 1e-9,
        "{}",
        audit.p_measured
    );
    assert!(!audit.components_strongly_convex);
    assert!(b
        .problem
        .components()
        .iter()
        .any(|c| c.hessian[(1, 1)] == -200.0));
}

#[test]
fn concave_requires_nonzero_d() {
    let s = spec(TheoremId::SmallLbConcave, 20, 400.0, 10);
    assert!(build(&s).unwrap_err().to_string().contains("D"));
    assert!(build(&s.clone().with_d(0.0)).is_err());
}

#[test]
fn concave_blow_up_at_boundary() {
    let (mu, kappa, n, g) = (1.0, 400.0, 20usize, 1.0);
    let ell = kappa * mu;
    for k in [10usize, 25, 50, 100] {
        let block = concave_block(ell, g, n).unwrap();
        let eta = 1.0 / (mu * (n * k) as f64);
        let rec = run(
            &block,
            &ShuffleStrategy::Igd,
            &RunConfig::new(eta, k, vec![0.0]),
        )
        .unwrap();
        let floor = g / (9.0 * ell) * (1.0 + ell / (2.0 * mu * (n * k) as f64)).powi(n as i32 / 2);
        assert!(rec.epoch_starts.iter().all(|x| x[0] >= 0.0));
        assert!(
            rec.final_iterate[0] >= floor,
            "K = {k}: {} < {floor}",
            rec.final_iterate[0]
        );
    }
}

#[test]
fn large_concave_groups_for_n_eight() {
    let (mu, ell) = (1.0, 8.0);
    let p = large_concave_block(mu, ell, 1.0, 8).unwrap();
    let parts: Vec<(f64, f64)> = p
        .components()
        .iter()
        .map(|c| (c.hessian[(0, 0)], c.linear[0]))
        .collect();
    assert_eq!(
        parts,
        vec![
            (0.0, 1.0),
            (0.0, 1.0),
            (8.0, 0.0),
            (8.0, 0.0),
            (0.0, -1.0),
            (0.0, -1.0),
            (-4.0, 0.0),
            (-4.0, 0.0)
        ]
    );
    assert_eq!(p.avg_hessian()[(0, 0)], mu);
}

#[test]
fn large_concave_padding_keeps_groups_equal() {
    let p = large_concave_block(1.0, 11.0, 1.0, 11).unwrap();
    let zeros = p
        .components()
        .iter()
        .filter(|c| c.hessian[(0, 0)] == 0.0 && c.linear[0] == 0.0)
        .count();
    assert_eq!(zeros, 3);
    assert!((p.avg_hessian()[(0, 0)] - 8.0 / 11.0).abs() < 1e-15);
    let b = build(&spec(TheoremId::LargeLbConcave, 10, 10.0, 32)).unwrap();
    assert!(b.notes.iter().any(|s| s.contains("not a multiple of 4")));
}

#[test]
fn concave_curvature_parameter_in_range() {
    for kappa in [4.0, 5.0, 16.0, 1e3] {
        let (mu, ell) = (1.0, kappa);
        let a = ell - 4.0 * mu;
        assert!(0.0 <= a && a < ell);
    }
}

#[test]
fn pq_contracts_per_epoch() {
    let (mu, kappa, n, k) = (1.0, 8.0, 8usize, 25usize);
    let ell = kappa * mu;
    for eta in log_grid(1.0 / (mu * (n * k) as f64), 1.0 / (n as f64 * ell), 40) {
        let pq = large_concave_pq(mu, ell, n, eta).unwrap();
        assert!(pq.p * pq.q <= (-1.0 / k as f64).exp(), "eta = {eta}");
    }
}

#[test]
fn large_idhess_structure() {
    let b = build(&spec(TheoremId::LargeLbIdhess, 3, 10.0, 20)).unwrap();
    let block = &b.per_dimension[1].problem;
    assert!(block.components().iter().all(|c| c.hessian[(0, 0)] == 5.0));
    assert_eq!(block.components()[0].linear, vec![0.0]);
    let audit = audit_assumptions(&b.problem);
    assert!(audit.identical_hessians);
    assert_eq!(audit.p_measured, 0.0);
}

#[test]
fn regimes_partition_the_positive_axis() {
    for b in sample_bundles() {
        let r = &b.regimes;
        assert_eq!(r[0].lo, 0.0);
        assert_eq!(r.last().unwrap().hi, f64::INFINITY);
        for w in r.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
            assert!(w[0].lo < w[0].hi);
        }
        let min = r
            .iter()
            .map(|x| x.gap_lower_bound)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(b.analytic_lower_bound, min);
        assert!(min > 0.0);
    }
    let b = build(&spec(TheoremId::LargeLbConcave, 8, 8.0, 25)).unwrap();
    assert_eq!(b.regimes.len(), 4);
}

#[test]
fn aggregate_runs_match_per_block_runs() {
    for b in sample_bundles() {
        let eta = b.spec.eta_moderate() * 3.0;
        let k = 3;
        let whole = run(
            &b.problem,
            &ShuffleStrategy::Igd,
            &RunConfig::new(eta, k, b.x0.clone()),
        )
        .unwrap();
        let mut pieces = Vec::new();
        let mut gap_sum = 0.0;
        for blk in &b.per_dimension {
            let rec = run(
                &blk.problem,
                &ShuffleStrategy::Igd,
                &RunConfig::new(eta, k, blk.x0.clone()),
            )
            .unwrap();
            gap_sum += optimality_gap(&blk.problem, &rec.final_iterate).unwrap();
            pieces.extend(rec.final_iterate);
        }
        for (a, c) in whole.final_iterate.iter().zip(&pieces) {
            assert!((a - c).abs() <= 1e-12 * a.abs().max(1e-300), "{a} vs {c}");
        }
        let g = optimality_gap(&b.problem, &whole.final_iterate).unwrap();
        assert!((g - gap_sum).abs() <= 1e-12 * g.max(1e-300));
    }
}

#[test]
fn two_scalar_problems_aggregate_additively() {
    let p1 = scalar_block(2.0, |i| if i == 0 { 1.0 } else { -3.0 }, 2).unwrap();
    let p2 = scalar_block(5.0, |i| i as f64, 2).unwrap();
    let (agg, x0) = aggregate_dimensions(&[(&p1, &[0.5][..]), (&p2, &[-1.0][..])]).unwrap();
    assert_eq!(agg.dim(), 2);
    assert_eq!(x0, vec![0.5, -1.0]);
    let x = [0.3, 0.7];
    let sum = optimality_gap(&p1, &x[..1]).unwrap() + optimality_gap(&p2, &x[1..]).unwrap();
    assert!((optimality_gap(&agg, &x).unwrap() - sum).abs() < 1e-12);
    let p3 = scalar_block(1.0, |_| 0.0, 3).unwrap();
    assert!(aggregate_dimensions(&[(&p1, &[0.0][..]), (&p3, &[0.0][..])]).is_err());
}

#[test]
fn declared_constants_bracket_the_spectrum() {
    for b in sample_bundles() {
        let audit = audit_assumptions(&b.problem);
        assert!(audit.mu_measured >= b.problem.mu() * (1.0 - 1e-9));
        assert!(audit.ell_measured <= b.problem.ell() * (1.0 + 1e-9));
        assert_eq!(b.problem.ell(), b.spec.ell());
    }
}

#[test]
fn violations_name_the_inequality() {
    let cases = [
        (
            spec(TheoremId::SmallLbSc, 100, 1e4, 1000),
            "K ≤ kappa/(16π)",
        ),
        (spec(TheoremId::SmallLbIdhess, 1, 10.0, 2), "n ≥ 2"),
        (spec(TheoremId::SmallLbIdhess, 4, 10.0, 6), "K ≤ kappa/2"),
        (spec(TheoremId::LargeLbIdhess, 4, 10.0, 5), "K ≥ kappa"),
        (spec(TheoremId::LargeLbConcave, 8, 4.0, 100), "kappa ≥ n"),
        (spec(TheoremId::LargeLbConcave, 8, 8.0, 10), "K ≥ max"),
    ];
    for (s, needle) in cases {
        let err = build(&s).unwrap_err().to_string();
        assert!(err.contains(needle), "{err}");
    }
    assert!(build(&spec(TheoremId::SmallUbIdhess, 4, 10.0, 2)).is_err());
}
