use permsgd::objectives::{from_key, C1, ZOO_KEYS};
use permsgd::optimizer::Record;
use permsgd::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn zoo() -> Vec<FiniteSumObjective> {
    vec![
        make_f1_quadratic(0.7, 3, 5).unwrap(),
        make_f2_piecewise(1.0, 1.0 / C1, 1.0, 8).unwrap(),
        make_f2_piecewise(2.0, 0.5, 0.3, 6).unwrap(),
        make_f3_quadratic_pm(1.5, 0.4, 10).unwrap(),
        make_thm1_aggregate(1.0, 1.0 / 4830.0, 1.0, 8, 50).unwrap(),
        make_thm7_coupled(1.0, 0.25, 0.8, 6).unwrap(),
        make_thm9_nonconvex_pair(1.0, 0.05, 1.0, 8).unwrap(),
        make_thm9_single_heavy(1.0, 0.5, 7).unwrap(),
        make_diverging_quadratic(1.0, 4, 2.0).unwrap(),
        make_shifted_quadratic(1.0, 0.1, 1.0, 16, 8, 3).unwrap(),
        pad_to_even(&make_f3_quadratic_pm(1.0, 1.0, 6).unwrap()),
    ]
}

#[test]
fn every_construction_passes_its_audit() {
    for (i, obj) in zoo().iter().enumerate() {
        for scale in [0.1, 3.0] {
            let a = obj.audit(1000, scale, 40 + i as u64);
            assert!(a.passes(), "{} at scale {scale}: {a:?}", obj.name);
        }
    }
}

#[test]
fn every_zoo_key_builds() {
    for key in ZOO_KEYS {
        let mu = if *key == "thm1_aggregate" { 1.0 / 4830.0 } else { 0.01 };
        let params = json!({"L": 1.0, "mu": mu, "nu": 1.0, "n": 4, "K": 10, "dim": 2});
        let obj = from_key(key, &params).unwrap_or_else(|e| panic!("{key}: {e}"));
        assert!(obj.audit(200, 1.0, 1).passes(), "{key}");
    }
    assert!(from_key("f3_quadratic_pm", &json!({"n": 3})).is_err());
    assert_eq!(from_key("f3_quadratic_pm", &json!({"n": 4, "pad": true})).unwrap().n(), 5);
}

#[test]
fn aggregate_is_the_sum_of_its_blocks() {
    let (l, mu, nu, n) = (1.0, 1.0 / 4830.0, 1.0, 8);
    let agg = make_thm1_aggregate(l, mu, nu, n, 20).unwrap();
    let nb = nu / 3f64.sqrt();
    let blocks = [
        make_f1_quadratic(mu, 1, n).unwrap(),
        make_f2_piecewise(l, l / C1, nb, n).unwrap(),
        make_f3_quadratic_pm(l, nb, n).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let v: f64 = blocks.iter().enumerate().map(|(j, b)| b.value(&[p[j]])).sum();
        assert!((agg.value(&p) - v).abs() <= 1e-12 * (1.0 + v.abs()));
        let g = agg.grad(&p);
        for (j, b) in blocks.iter().enumerate() {
            assert!((g[j] - b.grad(&[p[j]])[0]).abs() <= 1e-12);
        }
    }
}

#[test]
fn coupled_objective_is_separable() {
    let f = make_thm7_coupled(1.0, 0.5, 0.7, 4).unwrap();
    let y = make_f2_piecewise(1.0, 0.5, 0.7, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10_000 {
        let p = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        // Both coordinates see the same pair of +/- families.
        let v = y.value(&[p[0]]) + y.value(&[p[1]]);
        assert!((f.value(&p) - v).abs() <= 1e-12 * (1.0 + v.abs()));
    }
}

#[test]
fn restriction_reproduces_each_coordinate() {
    let agg = make_thm1_aggregate(1.0, 1.0 / 4830.0, 1.0, 8, 30).unwrap();
    let full = run_epochs(RunConfig::new(&agg, PermutationPolicy::random_reshuffle(3), 1e-3, 30)).unwrap();
    for j in 0..3 {
        let part = agg.restrict(j).unwrap();
        let t = run_epochs(RunConfig::new(&part, PermutationPolicy::random_reshuffle(3), 1e-3, 30)).unwrap();
        for (a, b) in full.end_points.iter().zip(&t.end_points) {
            assert_eq!(a[j].to_bits(), b[0].to_bits());
        }
    }
    let quiet =
        run_epochs(RunConfig::new(&agg, PermutationPolicy::random_reshuffle(3), 1e-3, 30).with_record(Record::Nothing))
            .unwrap();
    assert_eq!(quiet.final_point(), full.final_point());
}

#[test]
fn piecewise_gradient_is_continuous_at_the_break() {
    for obj in zoo() {
        for c in obj.components() {
            let d = c.dim();
            let left = c.grad(&vec![-1e-300; d]);
            let right = c.grad(&vec![0.0; d]);
            for (a, b) in left.iter().zip(&right) {
                assert!((a - b).abs() <= 1e-12, "{}", obj.name);
            }
        }
    }
}

#[test]
fn padding_rescales_the_average() {
    let f = make_f3_quadratic_pm(1.0, 1.0, 6).unwrap();
    let p = pad_to_even(&f);
    assert_eq!(p.n(), 7);
    for x in [-2.0, 0.3, 5.0] {
        assert!((p.value(&[x]) - f.value(&[x]) * 6.0 / 7.0).abs() < 1e-14);
    }
    assert!((p.constants.mu - f.constants.mu * 6.0 / 7.0).abs() < 1e-15);
}
