//! Frozen reference values. Hand-derived or independently computed numbers
//! are marked `derived`; values quoted from the source analysis are marked
//! `published`.

use permsgd::objectives::{C1, C2, INIT_FACTOR};
use permsgd::optimizer::grab_w_argument;
use permsgd::oracle::{check_central_binomial, weighted_sign_second_moment};
use permsgd::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

#[test]
fn published_constants() {
    assert_eq!((C1, C2, INIT_FACTOR), (2415.0, 161.0, 1.0 / 27000.0));
}

// published: E|E_2| = 1 - 1/(n-1).
#[test]
fn second_prefix_expectation() {
    for n in [4usize, 8, 12, 20] {
        let s = sign_stats_exact(n).unwrap();
        assert!(close(s.e_abs_mean[2], 1.0 - 1.0 / (n as f64 - 1.0), 1e-14));
    }
}

// derived: exact rational enumeration of the C(6,3) = 20 patterns in Python.
#[test]
fn sign_stats_n6() {
    let s = sign_stats_exact(6).unwrap();
    assert!(close(s.e_abs_mean[3], 1.2, 1e-14));
    assert!(close(s.p_zero[2], 0.6, 1e-14));
    assert!(close(s.p_positive[1], 0.5, 1e-14));
    assert!(close(s.p_positive[3], 0.5, 1e-14));
}

// derived: C(2,1)C(2,1)/C(4,2) = 2/3; C(4,2)C(4,2)/C(8,4) = 36/70.
#[test]
fn binomial_ratios() {
    assert!(close(central_binomial_ratio(4, 2).unwrap(), 2.0 / 3.0, 1e-14));
    assert!(close(central_binomial_ratio(8, 4).unwrap(), 36.0 / 70.0, 1e-14));
    assert!(check_central_binomial(64).unwrap().pass);
}

// derived: W0(1) by Newton iteration (omega constant).
#[test]
fn lambert_reference_points() {
    assert!(close(lambert_w0(1.0).unwrap(), 0.5671432904097838, 1e-15));
    assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
    assert!(close(lambert_w0(std::f64::consts::E).unwrap(), 1.0, 1e-15));
    assert!(close(lambert_w0(-1.0 / std::f64::consts::E).unwrap(), -1.0, 1e-7));
}

// derived: choose the initial gap so that the W0 argument is exactly 1 or e.
#[test]
fn grab_stepsize_hand_cases() {
    let (l, mu, nu, h, n, k) = (1.0, 0.1f64, 1.0, 1.0, 4usize, 10usize);
    let unit = 192.0 * h * h * l * l * nu * nu / (mu.powi(3) * (n * n * k * k) as f64);
    for (target, w) in [(1.0, 0.5671432904097838), (std::f64::consts::E, 1.0)] {
        let gap = target * unit - nu * nu / l;
        assert!(close(grab_w_argument(gap, l, mu, nu, h, n, k), target, 1e-13));
        let eta = stepsize_grab(gap, l, mu, nu, h, n, k).unwrap();
        assert!(close(eta, 2.0 * w / (mu * (n * k) as f64), 1e-12));
    }
}

// derived: two hand-unrolled steps of the +/- quadratic, and their average square.
#[test]
fn f3_two_step_values() {
    let f = make_f3_quadratic_pm(1.0, 1.0, 2).unwrap();
    let run = |order: Vec<usize>| {
        let cfg = RunConfig::new(&f, PermutationPolicy::new(PolicyKind::Fixed(order), 0), 0.1, 1).with_x0(vec![0.0]);
        run_epochs(cfg).unwrap().final_point()[0]
    };
    let (a, b) = (run(vec![0, 1]), run(vec![1, 0]));
    assert!(close(a, 0.01, 1e-13) && close(b, -0.01, 1e-13));
    assert!(close(0.5 * (a * a + b * b), 1e-4, 1e-12));
    let exact = rr_expectation_exact(&f, &[0.0], 0.1, 1, &AveragingScheme::final_iterate(1)).unwrap();
    assert!(close(exact, 5e-5, 1e-12));
}

// published: one epoch of identical quadratics contracts by (1 - eta mu)^n.
#[test]
fn f1_epoch_contraction() {
    let f = make_f1_quadratic(0.5, 1, 4).unwrap();
    let t = run_epochs(RunConfig::new(&f, PermutationPolicy::incremental(), 0.1, 1).with_x0(vec![1.0])).unwrap();
    assert!(close(t.final_point()[0], 0.81450625, 1e-15));
}

// derived: piecewise gradients from the definitions.
#[test]
fn piecewise_gradients() {
    let f2 = make_f2_piecewise(2.0, 0.5, 0.3, 2).unwrap();
    assert!(close(f2.component(0).grad(&[-1.0])[0], -1.7, 1e-15));
    let f7 = make_thm7_coupled(2.0, 1.0, 0.5, 2).unwrap();
    assert!(close(f7.component(0).grad(&[1.0, 0.0])[0], 1.5, 1e-15));
}

// derived: averages of the two nonconvex families.
#[test]
fn nonconvex_averages() {
    let pair = make_thm9_nonconvex_pair(1.0, 0.1, 1.0, 4).unwrap();
    assert!(close(pair.value(&[2.0]), 0.2, 1e-14));
    let heavy = make_thm9_single_heavy(4.0, 1.0, 4).unwrap();
    assert!(close(heavy.value(&[1.0]), 0.25, 1e-14));
}

// published: the aggregate starts at (nu/mu, nu/(27000 mu sqrt(n) K), 0).
#[test]
fn aggregate_initial_point() {
    let (mu, n, k) = (1.0 / 4830.0, 8usize, 100usize);
    let f = make_thm1_aggregate(1.0, mu, 2.0, n, k).unwrap();
    let x0 = f.default_x0();
    assert!(close(x0[0], 2.0 / mu, 1e-15));
    assert!(close(x0[1], 2.0 / (27000.0 * mu * (n as f64).sqrt() * k as f64), 1e-15));
    assert_eq!(x0[2], 0.0);
    assert!(matches!(make_thm1_aggregate(1.0, 1.0 / 2000.0, 1.0, n, k), Err(Error::Regime(_))));
}

// published: eta = 1/L leaves w unchanged after an even number of steps;
// eta = 1/(2L) reaches the optimum in one step.
#[test]
fn diverging_quadratic_points() {
    let f = make_diverging_quadratic(1.0, 4, 3.0).unwrap();
    let t = run_epochs(RunConfig::new(&f, PermutationPolicy::incremental(), 1.0, 2)).unwrap();
    assert_eq!(t.final_point()[0], 3.0);
    let mut w = [3.0];
    f.component(0).step(&mut w, 0.5);
    assert_eq!(w[0], 0.0);
}

// derived: all 24 orders of {+1, +1, -1, -1}; the best prefix bound is 1.
#[test]
fn greedy_on_pm_batch() {
    let b = VectorBatch::new(&[vec![1.0], vec![1.0], vec![-1.0], vec![-1.0]], 1e-12).unwrap();
    let best = enumerate_all_orders(4)
        .unwrap()
        .map(|o| prefix_norm_profile(&b, &o).unwrap().into_iter().fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    let r = herd_greedy(&b);
    assert_eq!(best, 1.0);
    assert_eq!(r.achieved_h, 1.0);
    assert_eq!(r.order, vec![0, 2, 1, 3]);
}

// derived: hand-run of one GraB epoch on the +/- quadratic.
#[test]
fn grab_alternates_signs() {
    let f = make_f3_quadratic_pm(1.0, 1.0, 6).unwrap();
    let t =
        run_epochs(RunConfig::new(&f, PermutationPolicy::grab(HerdingVariant::Greedy, 0), 0.01, 2).with_x0(vec![0.0]))
            .unwrap();
    let second = &t.permutations_used[1];
    let signs: Vec<bool> = second.iter().map(|&i| i < 3).collect();
    assert!(signs.windows(2).all(|w| w[0] != w[1]), "{second:?}");
}

// published: heavy component first minimises the one-epoch gap.
#[test]
fn exhaustive_structure_small() {
    let heavy = make_thm9_single_heavy(1.0, 1.0, 4).unwrap();
    let ex =
        exhaustive_permutation_value(&heavy, &heavy.default_x0(), 0.75, 1, &AveragingScheme::final_iterate(1)).unwrap();
    assert_eq!(ex.argmin[0][0], 0);
    let pair = make_thm9_nonconvex_pair(1.0, 1.0 / 32.0, 1.0, 4).unwrap();
    let ex =
        exhaustive_permutation_value(&pair, &pair.default_x0(), 0.2, 1, &AveragingScheme::final_iterate(1)).unwrap();
    assert!(ex.minimizers.iter().all(|s| s[0][0] < 2 && s[0][1] < 2));
}

// derived: E[(sum w_i s_i)^2] = n/(n-1) sum w^2 - (sum w)^2/(n-1) for balanced signs.
#[test]
fn weighted_second_moment_closed_form() {
    for (n, q) in [(2usize, 0.5f64), (10, 0.99), (16, 0.3)] {
        let w: Vec<f64> = (1..=n).map(|i| q.powi((n - i) as i32)).collect();
        let s1: f64 = w.iter().sum();
        let s2: f64 = w.iter().map(|v| v * v).sum();
        let nf = n as f64;
        let closed = nf / (nf - 1.0) * s2 - s1 * s1 / (nf - 1.0);
        assert!(close(weighted_sign_second_moment(n, q).unwrap(), closed, 1e-12));
    }
}

// derived: the random-reshuffling step is capped at 2/(Ln).
#[test]
fn mishchenko_cap() {
    assert_eq!(stepsize_mishchenko_strcvx(1.0, 1e-3, 1e-6, 1e6, 2, 1).unwrap(), 1.0);
}
