//! Exact brute-force computations: sign-pattern statistics, binomial ratios,
//! best/worst orders by enumeration, exact random-reshuffling expectations,
//! and grid scans of the auxiliary inequalities.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::objectives::{make_thm7_coupled, ComponentFn, FiniteSumObjective};
use crate::optimizer::{average_points, AveragingScheme};
use crate::shuffler::{enumerate_all_orders, factorial};

/// State-space limit for every enumeration in this module.
pub const MAX_STATES: f64 = 1e6;
/// Largest `n` for [`sign_stats_exact`].
pub const MAX_SIGN_N: usize = 20;

/// Statistics of the prefix sums `E_i` of a uniformly random balanced ±1
/// pattern; every list is indexed by `i = 0..=n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignStats {
    pub n: usize,
    pub e_abs_mean: Vec<f64>,
    pub p_positive: Vec<f64>,
    pub p_zero: Vec<f64>,
}

pub fn sign_stats_exact(n: usize) -> Result<SignStats> {
    if n == 0 || n % 2 != 0 || n > MAX_SIGN_N {
        return Err(Error::Guardrail(format!("sign statistics need even 2 <= n <= {MAX_SIGN_N}, got {n}")));
    }
    let mut abs_sum = vec![0u64; n + 1];
    let mut pos = vec![0u64; n + 1];
    let mut zero = vec![0u64; n + 1];
    let mut count = 0u64;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != n / 2 {
            continue;
        }
        count += 1;
        let mut e: i64 = 0;
        zero[0] += 1;
        for i in 0..n {
            e += if mask >> i & 1 == 1 { 1 } else { -1 };
            abs_sum[i + 1] += e.unsigned_abs();
            if e > 0 {
                pos[i + 1] += 1;
            } else if e == 0 {
                zero[i + 1] += 1;
            }
        }
    }
    let c = count as f64;
    let scale = |v: Vec<u64>| v.into_iter().map(|a| a as f64 / c).collect();
    Ok(SignStats { n, e_abs_mean: scale(abs_sum), p_positive: scale(pos), p_zero: scale(zero) })
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `C(i, i/2) C(n-i, (n-i)/2) / C(n, n/2)`, i.e. `P(E_i = 0)`.
pub fn central_binomial_ratio(n: usize, i: usize) -> Result<f64> {
    if n < 4 || n % 2 != 0 || i % 2 != 0 || i < 2 || i > n / 2 {
        return param(format!("need even n >= 4 and even 2 <= i <= n/2, got n = {n}, i = {i}"));
    }
    Ok((ln_binomial(i, i / 2) + ln_binomial(n - i, (n - i) / 2) - ln_binomial(n, n / 2)).exp())
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn run_order(obj: &FiniteSumObjective, x: &[f64], eta: f64, order: &[usize]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &i in order {
        obj.component(i).step(&mut y, eta);
    }
    y
}

fn key_of(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// Orders grouped by the exact end point they produce from one start.
fn grouped_endpoints(
    obj: &FiniteSumObjective,
    x: &[f64],
    eta: f64,
    orders: &[Vec<usize>],
) -> Vec<(Vec<f64>, Vec<usize>)> {
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for (oi, order) in orders.iter().enumerate() {
        let y = run_order(obj, x, eta, order);
        match index.get(&key_of(&y)) {
            Some(&g) => groups[g].1.push(oi),
            None => {
                index.insert(key_of(&y), groups.len());
                groups.push((y, vec![oi]));
            }
        }
    }
    groups
}

fn check_states(per_epoch: f64, k: usize, what: &str) -> Result<()> {
    let states = per_epoch.powi(k as i32);
    if states > MAX_STATES {
        return Err(Error::Guardrail(format!("{what}: {states:.3e} order sequences exceed {MAX_STATES:.0e}")));
    }
    Ok(())
}

fn check_run_args(obj: &FiniteSumObjective, x0: &[f64], eta: f64, k: usize, scheme: &AveragingScheme) -> Result<()> {
    if x0.len() != obj.dim() {
        return param("x0 dimension does not match the objective");
    }
    if eta.is_nan() || eta <= 0.0 || k == 0 {
        return param("need eta > 0 and K >= 1");
    }
    if scheme.weights().len() != k + 1 {
        return param(format!("scheme needs {} weights", k + 1));
    }
    Ok(())
}

fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()) || a == b
}

/// Result of [`exhaustive_permutation_value`]. Order sequences list one
/// permutation of component ids per epoch.
#[derive(Clone, Debug, Serialize)]
pub struct Exhaustive {
    pub min_gap: f64,
    pub max_gap: f64,
    pub argmin: Vec<Vec<usize>>,
    pub argmax: Vec<Vec<usize>>,
    /// Every sequence whose gap ties the minimum (relative tolerance 1e-12).
    pub minimizers: Vec<Vec<Vec<usize>>>,
    pub sequences: f64,
}

#[derive(Clone, Debug)]
struct Partial {
    min_gap: f64,
    max_gap: f64,
    /// Per-epoch groups of order indices along each minimizing path.
    min_paths: Vec<Vec<Vec<usize>>>,
    max_path: Vec<Vec<usize>>,
}

impl Partial {
    fn leaf(gap: f64, path: &[Vec<usize>]) -> Self {
        Self { min_gap: gap, max_gap: gap, min_paths: vec![path.to_vec()], max_path: path.to_vec() }
    }

    fn merge(mut self, other: Self) -> Self {
        if ties(other.min_gap, self.min_gap) {
            self.min_paths.extend(other.min_paths);
        } else if other.min_gap < self.min_gap {
            self.min_gap = other.min_gap;
            self.min_paths = other.min_paths;
        }
        if other.max_gap > self.max_gap {
            self.max_gap = other.max_gap;
            self.max_path = other.max_path;
        }
        self
    }
}

struct Search<'a> {
    obj: &'a FiniteSumObjective,
    eta: f64,
    k: usize,
    weights: &'a [f64],
    orders: &'a [Vec<usize>],
}

impl Search<'_> {
    fn descend(&self, history: &mut Vec<Vec<f64>>, path: &mut Vec<Vec<usize>>) -> Partial {
        if path.len() == self.k {
            let xhat = average_points(history, self.weights).expect("weights validated");
            return Partial::leaf(self.obj.gap(&xhat), path);
        }
        let x = history.last().expect("history starts with x0").clone();
        let mut acc: Option<Partial> = None;
        for (y, group) in grouped_endpoints(self.obj, &x, self.eta, self.orders) {
            history.push(y);
            path.push(group);
            let part = self.descend(history, path);
            path.pop();
            history.pop();
            acc = Some(match acc {
                None => part,
                Some(a) => a.merge(part),
            });
        }
        acc.expect("at least one order")
    }
}

/// Exact min and max of `F(x_hat) - F*` over all `(n!)^K` order sequences,
/// searching depth first and merging orders that land on bit-identical
/// iterates.
pub fn exhaustive_permutation_value(
    obj: &FiniteSumObjective,
    x0: &[f64],
    eta: f64,
    k: usize,
    scheme: &AveragingScheme,
) -> Result<Exhaustive> {
    check_run_args(obj, x0, eta, k, scheme)?;
    let n = obj.n();
    let orders: Vec<Vec<usize>> = enumerate_all_orders(n)?.collect();
    check_states(factorial(n), k, "exhaustive search")?;
    let search = Search { obj, eta, k, weights: scheme.weights(), orders: &orders };
    let first = grouped_endpoints(obj, x0, eta, &orders);
    let parts: Vec<Partial> = first
        .into_par_iter()
        .map(|(y, group)| {
            let mut history = vec![x0.to_vec(), y];
            let mut path = vec![group];
            search.descend(&mut history, &mut path)
        })
        .collect();
    let best = parts.into_iter().reduce(Partial::merge).expect("n >= 1");
    let pick = |groups: &[Vec<usize>]| groups.iter().map(|g| orders[g[0]].clone()).collect::<Vec<_>>();
    let mut minimizers = Vec::new();
    for groups in &best.min_paths {
        expand(groups, &orders, &mut Vec::new(), &mut minimizers);
    }
    Ok(Exhaustive {
        min_gap: best.min_gap,
        max_gap: best.max_gap,
        argmin: pick(&best.min_paths[0]),
        argmax: pick(&best.max_path),
        minimizers,
        sequences: factorial(n).powi(k as i32),
    })
}

fn expand(groups: &[Vec<usize>], orders: &[Vec<usize>], prefix: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
    let Some((head, rest)) = groups.split_first() else {
        out.push(prefix.clone());
        return;
    };
    for &oi in head {
        prefix.push(orders[oi].clone());
        expand(rest, orders, prefix, out);
        prefix.pop();
    }
}

/// Distinct arrangements of identical components: each is a concrete order
/// (lowest unused ids first within a class); all carry the same number of
/// underlying permutations.
fn distinct_arrangements(obj: &FiniteSumObjective) -> Vec<Vec<usize>> {
    let comps = obj.components();
    let mut class_of = Vec::with_capacity(comps.len());
    let mut reps: Vec<&ComponentFn> = Vec::new();
    for c in comps {
        let id = reps.iter().position(|r| *r == c).unwrap_or_else(|| {
            reps.push(c);
            reps.len() - 1
        });
        class_of.push(id);
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); reps.len()];
    for (i, &c) in class_of.iter().enumerate() {
        members[c].push(i);
    }
    let mut labels = class_of.clone();
    labels.sort_unstable();
    let mut out = Vec::new();
    loop {
        let mut next_member = vec![0usize; reps.len()];
        out.push(
            labels
                .iter()
                .map(|&c| {
                    let id = members[c][next_member[c]];
                    next_member[c] += 1;
                    id
                })
                .collect(),
        );
        if !next_lex(&mut labels) {
            break;
        }
    }
    out
}

fn next_lex(p: &mut [usize]) -> bool {
    let Some(i) = (0..p.len().saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

fn multinomial_count(obj: &FiniteSumObjective) -> f64 {
    let comps = obj.components();
    let mut counts: Vec<(usize, &ComponentFn)> = Vec::new();
    for c in comps {
        match counts.iter_mut().find(|(_, r)| *r == c) {
            Some(e) => e.0 += 1,
            None => counts.push((1, c)),
        }
    }
    counts.iter().fold(factorial(comps.len()), |acc, (m, _)| acc / factorial(*m))
}

/// Exact `E[F(x_hat) - F*]` when every epoch draws a uniform permutation
/// independently. Identical components are merged, so the state count is the
/// number of distinct arrangements per epoch (`C(n, n/2)` for sign-pattern
/// objectives) raised to `K`.
pub fn rr_expectation_exact(
    obj: &FiniteSumObjective,
    x0: &[f64],
    eta: f64,
    k: usize,
    scheme: &AveragingScheme,
) -> Result<f64> {
    check_run_args(obj, x0, eta, k, scheme)?;
    check_states(multinomial_count(obj), k, "exact expectation")?;
    let arrangements = distinct_arrangements(obj);
    let weights = scheme.weights();
    let m = arrangements.len() as f64;

    fn go(
        obj: &FiniteSumObjective,
        eta: f64,
        k: usize,
        weights: &[f64],
        arrangements: &[Vec<usize>],
        history: &mut Vec<Vec<f64>>,
    ) -> f64 {
        if history.len() == k + 1 {
            let xhat = average_points(history, weights).expect("weights validated");
            return obj.gap(&xhat);
        }
        let x = history.last().expect("nonempty").clone();
        let mut acc = CompensatedSum::default();
        for (y, group) in grouped_endpoints(obj, &x, eta, arrangements) {
            history.push(y);
            acc.add(group.len() as f64 * go(obj, eta, k, weights, arrangements, history));
            history.pop();
        }
        acc.value() / arrangements.len() as f64
    }

    let first = grouped_endpoints(obj, x0, eta, &arrangements);
    let parts: Vec<f64> = first
        .into_par_iter()
        .map(|(y, group)| {
            let mut history = vec![x0.to_vec(), y];
            group.len() as f64 * go(obj, eta, k, weights, &arrangements, &mut history)
        })
        .collect();
    let mut acc = CompensatedSum::default();
    parts.into_iter().for_each(|v| acc.add(v));
    Ok(acc.value() / m)
}

/// End-of-epoch points of an all-quadratic objective along a given order
/// sequence, by composing each epoch into one diagonal affine map
/// `x -> a * x + b` before applying it.
pub fn affine_closed_form(
    obj: &FiniteSumObjective,
    x0: &[f64],
    eta: f64,
    orders: &[Vec<usize>],
) -> Result<Vec<Vec<f64>>> {
    if !obj.is_quadratic() {
        return Err(Error::Contract("closed form needs quadratic components".into()));
    }
    if x0.len() != obj.dim() {
        return param("x0 dimension does not match the objective");
    }
    let d = obj.dim();
    let mut points = vec![x0.to_vec()];
    for order in orders {
        let (mut a, mut b) = (vec![1.0; d], vec![0.0; d]);
        for &i in order {
            let (curv, lin) = obj.component(i).affine_parts().expect("checked quadratic");
            for j in 0..d {
                let q = 1.0 - eta * curv[j];
                a[j] *= q;
                b[j] = q * b[j] - eta * lin[j];
            }
        }
        let x = points.last().expect("nonempty");
        points.push((0..d).map(|j| a[j] * x[j] + b[j]).collect());
    }
    Ok(points)
}

#[derive(Clone, Debug, Serialize)]
pub struct RecursionViolation {
    pub y: f64,
    pub z: f64,
    /// Component types used at the two steps; `0` is `g+(y) + g-(z)`.
    pub assignment: [usize; 2],
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecursionReport {
    pub eta: f64,
    pub states: usize,
    pub checks: usize,
    pub worst_margin: f64,
    pub violations: Vec<RecursionViolation>,
    pub pass: bool,
}

/// Two-step inequality on the coupled construction: from any `(y, z)` with
/// `y + z >= 0`, every pair of component types gives
/// `y2 + z2 >= (1 - eta L/2)(1 - eta L)(y + z) + eta^2 L nu / 2`.
/// The first state checked is the origin.
pub fn coupled_recursion_check(l: f64, nu: f64, eta: f64, trials: usize, seed: u64) -> Result<RecursionReport> {
    if !(eta > 0.0 && eta < 1.0 / l) {
        return param(format!("need 0 < eta < 1/L, got eta = {eta}"));
    }
    let obj = make_thm7_coupled(l, l / 2.0, nu, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report =
        RecursionReport { eta, states: trials, checks: 0, worst_margin: f64::INFINITY, violations: vec![], pass: true };
    let contraction = (1.0 - eta * l / 2.0) * (1.0 - eta * l);
    for t in 0..trials {
        let (mut y, mut z) = if t == 0 {
            (0.0, 0.0)
        } else {
            let scale = nu / l * 10f64.powf(rng.gen_range(-6.0..2.0));
            (scale * rng.gen_range(-1.0..1.0), scale * rng.gen_range(-1.0..1.0))
        };
        if y + z < 0.0 {
            (y, z) = (-y, -z);
        }
        for a in 0..2 {
            for b in 0..2 {
                let mut p = [y, z];
                obj.component(a).step(&mut p, eta);
                obj.component(b).step(&mut p, eta);
                let margin = p[0] + p[1] - (contraction * (y + z) + eta * eta * l * nu / 2.0);
                let tol = 1e-12 * (1.0 + y.abs() + z.abs());
                report.checks += 1;
                report.worst_margin = report.worst_margin.min(margin);
                if margin < -tol {
                    report.pass = false;
                    report.violations.push(RecursionViolation { y, z, assignment: [a, b], margin });
                }
            }
        }
    }
    Ok(report)
}

/// One grid scan of an inequality; `worst_margin` is the smallest
/// `lhs - rhs` observed (relative where noted in `grid`).
#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub lemma_id: String,
    pub grid: String,
    pub checked: usize,
    pub worst_margin: f64,
    pub pass: bool,
}

impl LemmaReport {
    fn new(id: &str, grid: String, checked: usize, worst_margin: f64, pass: bool) -> Self {
        Self { lemma_id: id.into(), grid, checked, worst_margin, pass }
    }
}

/// `sqrt(i)/10 <= E|E_i| <= sqrt(i)` and `P(E_i > 0) >= 1/6` for all even
/// `n <= n_max` and `1 <= i <= n/2`.
pub fn check_sign_bounds(n_max: usize) -> Result<LemmaReport> {
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for n in (2..=n_max).step_by(2) {
        let s = sign_stats_exact(n)?;
        for i in 1..=n / 2 {
            let r = (i as f64).sqrt();
            let e = s.e_abs_mean[i];
            worst = worst.min(e - r / 10.0).min(r - e).min(s.p_positive[i] - 1.0 / 6.0);
            checked += 1;
        }
    }
    Ok(LemmaReport::new(
        "sign_prefix_bounds",
        format!("even n in 2..={n_max}, 1 <= i <= n/2"),
        checked,
        worst,
        worst >= -1e-12,
    ))
}

/// `E|E_{i+1}| = (1 - 1/(n-i)) E|E_i| + P(E_i = 0)` for all `0 <= i < n`.
pub fn check_sign_recurrence(n_max: usize) -> Result<LemmaReport> {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for n in (2..=n_max).step_by(2) {
        let s = sign_stats_exact(n)?;
        for i in 0..n {
            let rhs = (1.0 - 1.0 / (n - i) as f64) * s.e_abs_mean[i] + s.p_zero[i];
            worst = worst.max((s.e_abs_mean[i + 1] - rhs).abs());
            checked += 1;
        }
    }
    Ok(LemmaReport::new(
        "sign_prefix_recurrence",
        format!("even n in 2..={n_max}, 0 <= i < n; margin is max abs error"),
        checked,
        worst,
        worst <= 1e-12,
    ))
}

/// Binomial ratio `>= 2/(5 sqrt(i))` for all valid `(n, i)`, `n <= n_max`.
pub fn check_central_binomial(n_max: usize) -> Result<LemmaReport> {
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for n in (4..=n_max).step_by(2) {
        for i in (2..=n / 2).step_by(2) {
            let r = central_binomial_ratio(n, i)?;
            worst = worst.min(r - 2.0 / (5.0 * (i as f64).sqrt()));
            checked += 1;
        }
    }
    Ok(LemmaReport::new(
        "central_binomial_ratio",
        format!("even 4 <= n <= {n_max}, even 2 <= i <= n/2"),
        checked,
        worst,
        worst > 0.0,
    ))
}

/// `(1 - 1/t)^t > (1/e)(1 - 1/t)` on integers `t` log-spaced in `[2, 10^6]`.
pub fn check_exp_limit(points: usize) -> LemmaReport {
    let mut ts: Vec<u64> =
        (0..points).map(|j| (2f64 * (5e5f64).powf(j as f64 / (points - 1) as f64)).round() as u64).collect();
    ts.dedup();
    let worst = ts
        .iter()
        .map(|&t| {
            let t = t as f64;
            let lhs = (t * (-1.0 / t).ln_1p()).exp();
            (lhs - (-1f64).exp() * (1.0 - 1.0 / t)) * t
        })
        .fold(f64::INFINITY, f64::min);
    LemmaReport::new(
        "one_minus_inv_t_power",
        format!("{} integers log-spaced in [2, 1e6]; margin scaled by t", ts.len()),
        ts.len(),
        worst,
        worst > 0.0,
    )
}

/// `(1+bx)^m (b-1) - b (1+bx)^m (1-x)^m + 1 >= m x^2/30` for even
/// `n in 104..=256`, `m = n/2`, `x in (0, 2/n]`, `b in [1-2/n, 1)`.
pub fn check_pair_drift(grid: usize) -> LemmaReport {
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for n in (104..=256).step_by(2) {
        let nf = n as f64;
        let m = nf / 2.0;
        for a in 1..=grid {
            let x = 2.0 / nf * a as f64 / grid as f64;
            for b in 0..grid {
                let beta = 1.0 - 2.0 / nf + 2.0 / nf * b as f64 / grid as f64;
                let up = (m * (beta * x).ln_1p()).exp();
                let down = (m * (-x).ln_1p()).exp();
                let lhs = up * (beta - 1.0) - beta * up * down + 1.0;
                let rhs = m * x * x / 30.0;
                worst = worst.min((lhs - rhs) / rhs);
                checked += 1;
            }
        }
    }
    LemmaReport::new(
        "pair_drift_lower_bound",
        format!("even n in 104..=256, {grid}x{grid} (x, beta) points; relative margin"),
        checked,
        worst,
        worst > 0.0,
    )
}

/// `exp(x/2) < 1 + x/2 + 5x^2/32` on `x = j/points`, `j = 1..=points`.
pub fn check_exp_quadratic(points: usize) -> LemmaReport {
    let worst = (1..=points)
        .map(|j| {
            let x = j as f64 / points as f64;
            (1.0 + x / 2.0 + 5.0 * x * x / 32.0 - (x / 2.0).exp()) / (x * x)
        })
        .fold(f64::INFINITY, f64::min);
    LemmaReport::new(
        "exp_half_quadratic",
        format!("{points} points in (0, 1]; margin divided by x^2"),
        points,
        worst,
        worst > 0.0,
    )
}

/// `E[(sum_i q^{n-i} s_i)^2]` over balanced sign patterns, by enumeration.
pub fn weighted_sign_second_moment(n: usize, q: f64) -> Result<f64> {
    if n == 0 || n % 2 != 0 || n > MAX_SIGN_N {
        return Err(Error::Guardrail(format!("need even 2 <= n <= {MAX_SIGN_N}")));
    }
    let w: Vec<f64> = (1..=n).map(|i| q.powi((n - i) as i32)).collect();
    let mut acc = CompensatedSum::default();
    let mut count = 0u64;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != n / 2 {
            continue;
        }
        let s: f64 = (0..n).map(|i| if mask >> i & 1 == 1 { w[i] } else { -w[i] }).sum();
        acc.add(s * s);
        count += 1;
    }
    Ok(acc.value() / count as f64)
}

/// Smallest observed `E[(sum q^{n-i} s_i)^2] / min{1 + 1/(eta L), (eta L)^2 n^3}`
/// with `q = 1 - eta L`, over even `n <= n_max` and `eta L` log-spaced in
/// `[1e-4, 1)`. Measured, not asserted: the constant is not pinned down.
pub fn measure_variance_constant(n_max: usize, points: usize) -> Result<LemmaReport> {
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for n in (2..=n_max).step_by(2) {
        for j in 0..points {
            let el = 1e-4 * (0.99e4f64).powf(j as f64 / (points - 1) as f64);
            let m = weighted_sign_second_moment(n, 1.0 - el)?;
            let floor = (1.0 + 1.0 / el).min(el * el * (n as f64).powi(3));
            worst = worst.min(m / floor);
            checked += 1;
        }
    }
    Ok(LemmaReport::new(
        "variance_constant_measured",
        format!("even n in 2..={n_max}, {points} eta*L values in [1e-4, 0.99]; margin is the measured constant"),
        checked,
        worst,
        worst > 0.0,
    ))
}

/// Every grid scan at the sizes used for acceptance.
pub fn lemma_suite() -> Result<Vec<LemmaReport>> {
    Ok(vec![
        check_sign_bounds(MAX_SIGN_N)?,
        check_sign_recurrence(MAX_SIGN_N)?,
        check_central_binomial(64)?,
        check_exp_limit(2000),
        check_pair_drift(50),
        check_exp_quadratic(10_000),
        measure_variance_constant(16, 40)?,
    ])
}
