//! Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers
//! as arguments to run a subset, e.g. `cargo test --test acceptance -- 4 8`.

use std::time::Instant;

use permsgd::harness::{coordinate_path, ObjectiveSpec, PolicySpec};
use permsgd::objectives::INIT_FACTOR;
use permsgd::oracle::{affine_closed_form, lemma_suite};
use permsgd::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn spec(objective: &str, params: serde_json::Value, policy: &str, axis: Axis, values: &[f64]) -> SweepSpec {
    SweepSpec {
        objective: ObjectiveSpec { key: objective.into(), params },
        policy: PolicySpec { key: policy.into(), herding: HerdingVariant::Greedy, order: None },
        axis,
        axis_values: values.to_vec(),
        seeds: 1,
        averaging: "final".into(),
        stepsize: StepSizeSpec::Fixed { eta: 0.0 },
        master_seed: 20240501,
        epochs: None,
        fresh_instance: false,
    }
}

fn criterion_1() -> Outcome {
    let mu = 1.0 / 64.0;
    let mut s = spec(
        "f2_piecewise",
        json!({"L": 1.0, "mu0": mu, "nu": 1.0, "n": 16, "x0": 1.0 / mu}),
        "rr",
        Axis::K,
        &[128.0, 256.0, 512.0, 1024.0],
    );
    s.seeds = 2000;
    s.averaging = "tail".into();
    s.stepsize = StepSizeSpec::TailAverage { d: None };
    let rows = run_sweep(&s).unwrap();
    let fit = fit_rate(&rows).unwrap();
    let gaps: Vec<String> = rows.iter().map(|r| format!("{:.3e}", r.mean_gap)).collect();
    outcome(
        (-2.3..=-1.7).contains(&fit.exponent) && fit.r_squared >= 0.97,
        format!(
            "exponent {:.3}, r^2 {:.4}, excluded {:?}, mean gaps {}",
            fit.exponent,
            fit.r_squared,
            fit.excluded,
            gaps.join(" ")
        ),
    )
}

fn criterion_2() -> Outcome {
    let base = |policy: &str, stepsize: StepSizeSpec| {
        let mut s = spec(
            "shifted_quadratic",
            json!({"L": 1.0, "mu": 0.1, "nu": 1.0, "dim": 8}),
            policy,
            Axis::N,
            &[8.0, 16.0, 32.0, 64.0],
        );
        s.seeds = 50;
        s.epochs = Some(256);
        s.fresh_instance = true;
        s.stepsize = stepsize;
        s
    };
    let rr = base("rr", StepSizeSpec::Mishchenko { d: None });
    let grab = base("grab", StepSizeSpec::Grab { h: None });
    let report = compare_policies(&rr, &grab).unwrap();
    let (fa, fb) = (report.fit_a.unwrap(), report.fit_b.unwrap());
    outcome(
        (-2.4..=-1.6).contains(&fb.exponent) && (-1.4..=-0.6).contains(&fa.exponent),
        format!(
            "GraB exponent {:.3} (r^2 {:.3}), RR exponent {:.3} (r^2 {:.3}), GraB/RR gap ratios {:?}",
            fb.exponent,
            fb.r_squared,
            fa.exponent,
            fa.r_squared,
            report.gap_ratio.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn criterion_3() -> Outcome {
    let (l, nu, n) = (1.0, 1.0, 8usize);
    let kappa = 2.0 * objectives::C1;
    let mu = l / kappa;
    let k = (2.0 * objectives::C2 * kappa).ceil() as usize;
    // Coordinate-separable: the y block alone reproduces y exactly.
    let obj = make_thm1_aggregate(l, mu, nu, n, k).unwrap().restrict(1).unwrap();
    let bound = INIT_FACTOR * nu / (mu * (n as f64).sqrt() * k as f64);
    let (lo, hi) = (1.0 / (mu * (n * k) as f64), 1.0 / (objectives::C2 * l * n as f64));
    let policy = PermutationPolicy::random_reshuffle(0);
    let mut worst = f64::INFINITY;
    let mut pass = true;
    for j in 0..5 {
        let eta = lo + (hi - lo) * j as f64 / 4.0;
        let path = coordinate_path(&obj, &policy, eta, k, 0, 2000, 7).unwrap();
        for (m, se) in path.mean.iter().zip(&path.stderr) {
            worst = worst.min((m - bound) / bound);
            if *m < bound - 3.0 * se || path.diverged > 0 {
                pass = false;
            }
        }
    }
    outcome(pass, format!("K = {k}, bound {bound:.4e}, smallest (mean - bound)/bound over k and eta {worst:.3e}"))
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let reports = lemma_suite().unwrap();
    let secs = t.elapsed().as_secs_f64();
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.lemma_id.as_str()).collect();
    let checked: usize = reports.iter().map(|r| r.checked).sum();
    outcome(failed.is_empty() && secs <= 60.0, format!("{checked} checks in {secs:.1}s, failing: {failed:?}"))
}

fn criterion_5() -> Outcome {
    let grid = |lo: f64, hi: f64| -> Vec<f64> { (0..8).map(|j| lo + (hi - lo) * j as f64 / 7.0).collect() };
    let scheme = AveragingScheme::final_iterate(1);
    let mut cases = 0;
    let mut bad = Vec::new();
    for n in 3..=6usize {
        let obj = make_thm9_single_heavy(1.0, 1.0, n).unwrap();
        let x0 = obj.default_x0();
        for eta in grid(2.0 / n as f64, 1.0) {
            let ex = exhaustive_permutation_value(&obj, &x0, eta, 1, &scheme).unwrap();
            cases += 1;
            if ex.minimizers.iter().any(|seq| seq[0][0] != 0) {
                bad.push(format!("single_heavy n={n} eta={eta:.3}"));
            }
        }
    }
    for n in [4usize, 6] {
        let (l, mu) = (1.0, 1.0 / (8.0 * n as f64));
        let kappa = l / mu;
        let k_nom = (kappa * kappa / n as f64).ceil();
        let obj = make_thm9_nonconvex_pair(l, mu, 1.0, n).unwrap();
        let x0 = obj.default_x0();
        for eta in grid(1.0 / (2.0 * mu * n as f64 * k_nom), 2.0 / (n as f64 * l)) {
            let ex = exhaustive_permutation_value(&obj, &x0, eta, 1, &scheme).unwrap();
            cases += 1;
            if ex.minimizers.iter().any(|seq| seq[0][..n / 2].iter().any(|&i| i >= n / 2)) {
                bad.push(format!("nonconvex_pair n={n} eta={eta:.4}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("{cases} (n, eta) cases, counterexamples: {bad:?}"))
}

fn criterion_6() -> Outcome {
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for (j, eta) in [0.1, 0.5, 0.9].into_iter().enumerate() {
        let r = coupled_recursion_check(1.0, 1.0, eta, 10_000, 100 + j as u64).unwrap();
        violations += r.violations.len();
        worst = worst.min(r.worst_margin);
    }
    outcome(violations == 0, format!("{violations} violations, worst margin {worst:.3e}"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for c in 0..100 {
        let n = 2 * rng.gen_range(1..=8);
        let obj = match c % 3 {
            0 => make_f1_quadratic(rng.gen_range(0.1..2.0), rng.gen_range(1..4), n).unwrap(),
            1 => make_f3_quadratic_pm(rng.gen_range(0.5..2.0), rng.gen_range(0.0..3.0), n).unwrap(),
            _ => make_shifted_quadratic(1.0, 0.05, 1.0, n, rng.gen_range(1..6), rng.gen()).unwrap(),
        };
        let l = obj.constants.l;
        let eta = rng.gen_range(0.01..1.0) / (l * n as f64);
        let epochs = rng.gen_range(1..20);
        let x0: Vec<f64> = (0..obj.dim()).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let policy = if c % 2 == 0 {
            PermutationPolicy::random_reshuffle(rng.gen())
        } else {
            PermutationPolicy::grab(HerdingVariant::Greedy, 0)
        };
        let trace = run_epochs(RunConfig::new(&obj, policy, eta, epochs).with_x0(x0.clone())).unwrap();
        let closed = affine_closed_form(&obj, &x0, eta, &trace.permutations_used).unwrap();
        for (a, b) in trace.end_points.iter().zip(&closed) {
            for (u, v) in a.iter().zip(b) {
                worst = worst.max((u - v).abs());
            }
        }
    }
    outcome(worst <= 1e-10, format!("max abs deviation {worst:.3e} over 100 configs"))
}

fn newton_w(x: f64) -> f64 {
    let mut w = if x > 1.0 { x.ln() } else { 0.5 };
    for _ in 0..200 {
        let e = w.exp();
        w -= (w * e - x) / (e * (w + 1.0));
    }
    w
}

fn criterion_8() -> Outcome {
    let e = std::f64::consts::E;
    let xs = [-1.0 / e + 1e-6, 0.0, 0.1, 1.0, e, 10.0, 1e6];
    let mut worst: f64 = 0.0;
    for x in xs {
        let w = lambert_w0(x).unwrap();
        worst = worst.max((w * w.exp() - x).abs() / x.abs().max(1.0));
    }
    let w1 = lambert_w0(1.0).unwrap();
    let diff = (w1 - newton_w(1.0)).abs();
    outcome(worst <= 1e-12 && diff <= 1e-12, format!("max scaled residual {worst:.3e}, |W0(1) - Newton| = {diff:.3e}"))
}

fn criterion_9() -> Outcome {
    let obj = make_f3_quadratic_pm(1.0, 1.0, 4).unwrap();
    let (eta, k, x0) = (0.1, 2usize, vec![0.5]);
    let exact = rr_expectation_exact(&obj, &x0, eta, k, &AveragingScheme::final_iterate(k)).unwrap();
    let m = 100_000usize;
    let gaps: Vec<f64> = (0..m as u64)
        .map(|s| {
            let cfg = RunConfig::new(&obj, PermutationPolicy::random_reshuffle(derive_seed(9, 0.0, s)), eta, k)
                .with_x0(x0.clone());
            obj.gap(run_epochs(cfg).unwrap().final_point())
        })
        .collect();
    let row = harness::summarize(k as f64, &gaps);
    let z = (row.mean_gap - exact) / row.stderr_gap;
    outcome(
        z.abs() <= 4.0,
        format!("exact {exact:.6e}, Monte Carlo {:.6e} +- {:.1e}, z = {z:.2}", row.mean_gap, row.stderr_gap),
    )
}

fn criterion_10() -> Outcome {
    let (n, d) = (256usize, 8usize);
    let threshold = 2.0 * (2.0 * d as f64 * (2.0 * n as f64).ln()).sqrt();
    let mut ratios = Vec::new();
    let mut within = 0;
    let mut walk_max: f64 = 0.0;
    for t in 0..100u64 {
        let batch = VectorBatch::random_unit(n, d, 1000 + t).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(5000 + t));
        let random_h = prefix_norm_profile(&batch, &order).unwrap().into_iter().fold(0.0, f64::max);
        ratios.push(random_h / herd_greedy(&batch).achieved_h);
        let walk = herd_signwalk(&batch, 9000 + t).achieved_h;
        walk_max = walk_max.max(walk);
        within += (walk <= threshold) as usize;
    }
    ratios.sort_by(f64::total_cmp);
    let median = 0.5 * (ratios[49] + ratios[50]);
    outcome(
        median >= 2.0 && within >= 99,
        format!("median random/greedy ratio {median:.3}, signwalk within {threshold:.3} in {within}/100 (max {walk_max:.3})"),
    )
}

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = 0;
    for (id, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id}: {status} {} [{:.1}s]", o.detail, t.elapsed().as_secs_f64());
        failed += !o.pass as usize;
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
