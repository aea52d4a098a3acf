//! Monte-Carlo sweeps over one axis (`K`, `n` or `eta`), log-log rate fits
//! and side-by-side policy comparisons.

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{param, Error, Result};
use crate::herding::{herd_greedy, VectorBatch};
use crate::objectives::{self, norm, FiniteSumObjective};
use crate::optimizer::{
    run_epochs, run_epochs_observed, stepsize_grab, stepsize_mishchenko_strcvx, stepsize_tail_average,
    weighted_average, AveragingScheme, Record, RunConfig,
};
use crate::shuffler::{HerdingVariant, PermutationPolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    K,
    #[serde(rename = "n")]
    N,
    #[serde(rename = "eta")]
    Eta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub key: String,
    #[serde(default = "empty_object")]
    pub params: Value,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub key: String,
    #[serde(default)]
    pub herding: HerdingVariant,
    /// Order for `fixed`, first-epoch order for `grab`.
    #[serde(default)]
    pub order: Option<Vec<usize>>,
}

/// How the step size is chosen for each run. `D` defaults to `|x0 - x*|`;
/// `H` defaults to the greedy-herding bound achieved by the centred,
/// normalised component gradients at `x*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSizeSpec {
    Fixed {
        eta: f64,
    },
    Mishchenko {
        #[serde(default, rename = "D")]
        d: Option<f64>,
    },
    TailAverage {
        #[serde(default, rename = "D")]
        d: Option<f64>,
    },
    Grab {
        #[serde(default, rename = "H")]
        h: Option<f64>,
    },
}

impl StepSizeSpec {
    pub fn resolve(&self, obj: &FiniteSumObjective, x0: &[f64], k: usize) -> Result<f64> {
        let c = obj.constants;
        let n = obj.n();
        let dist = || {
            let diff: Vec<f64> = x0.iter().zip(&obj.x_star).map(|(a, b)| a - b).collect();
            norm(&diff)
        };
        match *self {
            StepSizeSpec::Fixed { eta } => Ok(eta),
            StepSizeSpec::Mishchenko { d } => stepsize_mishchenko_strcvx(c.l, c.mu, c.nu, d.unwrap_or_else(dist), n, k),
            StepSizeSpec::TailAverage { d } => stepsize_tail_average(c.l, c.mu, c.nu, d.unwrap_or_else(dist), n, k),
            StepSizeSpec::Grab { h } => {
                let h = match h {
                    Some(h) => h,
                    None => herding_bound_at_optimum(obj)?,
                };
                stepsize_grab(obj.gap(x0), c.l, c.mu, c.nu, h, n, k)
            }
        }
    }
}

/// Greedy-herding prefix bound of the component gradients at `x*`, after
/// centring and scaling to unit maximum norm. Falls back to 1 when all
/// gradients coincide.
pub fn herding_bound_at_optimum(obj: &FiniteSumObjective) -> Result<f64> {
    let grads: Vec<Vec<f64>> = obj.components().iter().map(|c| c.grad(&obj.x_star)).collect();
    let (batch, scale) = VectorBatch::centered_normalized(&grads)?;
    if scale == 0.0 {
        return Ok(1.0);
    }
    Ok(herd_greedy(&batch).achieved_h)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub objective: ObjectiveSpec,
    pub policy: PolicySpec,
    pub axis: Axis,
    pub axis_values: Vec<f64>,
    pub seeds: usize,
    /// `final`, `average` or `tail`.
    #[serde(default = "final_key")]
    pub averaging: String,
    pub stepsize: StepSizeSpec,
    #[serde(default)]
    pub master_seed: u64,
    /// Epoch count when the axis is not `K`.
    #[serde(default)]
    pub epochs: Option<usize>,
    /// Rebuild the objective for every seed with `params.seed` set to the
    /// run seed (for randomly generated instances).
    #[serde(default)]
    pub fresh_instance: bool,
}

fn final_key() -> String {
    "final".into()
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Parameter(format!("bad sweep spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.axis_values.is_empty()
            || self.axis_values.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return param("axis_values must be nonempty and strictly increasing");
        }
        if self.axis_values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return param("axis_values must be positive");
        }
        if self.axis != Axis::Eta && self.axis_values.iter().any(|v| v.fract() != 0.0) {
            return param("K and n axis values must be integers");
        }
        if self.seeds == 0 {
            return param("need at least one seed");
        }
        if self.axis != Axis::K && self.epochs.is_none() {
            return param("`epochs` is required unless the axis is K");
        }
        AveragingScheme::from_key(&self.averaging, 1)?;
        Ok(())
    }

    fn epochs_at(&self, value: f64) -> usize {
        match self.axis {
            Axis::K => value as usize,
            _ => self.epochs.unwrap_or(1),
        }
    }

    fn objective_at(&self, value: f64, run_seed: Option<u64>) -> Result<FiniteSumObjective> {
        let mut params = match &self.objective.params {
            Value::Object(m) => m.clone(),
            Value::Null => Default::default(),
            _ => return param("objective params must be a JSON object"),
        };
        if self.axis == Axis::N {
            params.insert("n".into(), Value::from(value as u64));
        }
        if self.axis == Axis::K || !params.contains_key("K") {
            params.insert("K".into(), Value::from(self.epochs_at(value) as u64));
        }
        if let Some(s) = run_seed {
            params.insert("seed".into(), Value::from(s));
        }
        objectives::from_key(&self.objective.key, &Value::Object(params))
    }

    /// Gap of one run, `+inf` if it diverged.
    fn run_point(&self, obj: &FiniteSumObjective, value: f64, seed: u64) -> Result<f64> {
        let k = self.epochs_at(value);
        let x0 = obj.default_x0();
        let eta = match self.axis {
            Axis::Eta => value,
            _ => self.stepsize.resolve(obj, &x0, k)?,
        };
        let policy =
            PermutationPolicy::from_key(&self.policy.key, seed, self.policy.herding, self.policy.order.clone())?;
        let scheme = AveragingScheme::from_key(&self.averaging, k)?;
        let record = if self.averaging == "final" { Record::Nothing } else { Record::EndOfEpoch };
        let trace = run_epochs(RunConfig::new(obj, policy, eta, k).with_x0(x0).with_record(record))?;
        if trace.diverged {
            return Ok(f64::INFINITY);
        }
        let xhat = match record {
            Record::Nothing => trace.final_point().to_vec(),
            _ => weighted_average(&trace, &scheme)?,
        };
        Ok(obj.gap(&xhat))
    }
}

/// Run seed from `(master, axis value, seed index)`; a splitmix64 finaliser
/// over the combined words.
pub fn derive_seed(master: u64, axis_value: f64, index: u64) -> u64 {
    let mut h = splitmix(master ^ 0x243F_6A88_85A3_08D3);
    h = splitmix(h ^ axis_value.to_bits());
    splitmix(h ^ index)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub mean_gap: f64,
    pub stderr_gap: f64,
    pub median_gap: f64,
    /// Runs that diverged; any divergence makes the mean infinite.
    pub diverged: usize,
    pub seeds: usize,
}

/// Pairwise sum, so the rounding does not depend on how work was scheduled.
fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn summarize(axis_value: f64, gaps: &[f64]) -> SweepRow {
    let m = gaps.len();
    let diverged = gaps.iter().filter(|g| !g.is_finite()).count();
    let mean = pairwise_sum(gaps) / m as f64;
    let stderr = if m > 1 && diverged == 0 {
        // Shifted by the first sample so identical gaps give exactly zero.
        let shift: Vec<f64> = gaps.iter().map(|g| g - gaps[0]).collect();
        let sq: Vec<f64> = shift.iter().map(|s| s * s).collect();
        let s1 = pairwise_sum(&shift);
        let var = ((pairwise_sum(&sq) - s1 * s1 / m as f64) / (m - 1) as f64).max(0.0);
        (var / m as f64).sqrt()
    } else if diverged > 0 {
        f64::INFINITY
    } else {
        0.0
    };
    let mut sorted = gaps.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if m % 2 == 1 { sorted[m / 2] } else { 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]) };
    SweepRow { axis_value, mean_gap: mean, stderr_gap: stderr, median_gap: median, diverged, seeds: m }
}

/// Mean, standard error and median of the final gap at every axis value.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    spec.axis_values
        .iter()
        .map(|&value| {
            let shared = if spec.fresh_instance { None } else { Some(spec.objective_at(value, None)?) };
            let gaps = (0..spec.seeds as u64)
                .into_par_iter()
                .map(|i| {
                    let seed = derive_seed(spec.master_seed, value, i);
                    match &shared {
                        Some(obj) => spec.run_point(obj, value, seed),
                        None => spec.run_point(&spec.objective_at(value, Some(seed))?, value, seed),
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(summarize(value, &gaps))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard error of the exponent.
    pub stderr: f64,
    /// Axis values left out of the fit (non-finite gaps, or the smallest
    /// value when the first fit had `r^2 < 0.98`).
    pub excluded: Vec<f64>,
    pub points: usize,
}

/// Least squares of `ln y` on `ln x`. Needs at least 3 points; returns
/// `(slope, intercept, r^2, slope stderr)`.
pub fn loglog_ols(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let m = xs.len();
    if m < 3 || ys.len() != m {
        return Err(Error::Fit(format!("need at least 3 paired points, got {m}")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / m as f64;
    let my = ly.iter().sum::<f64>() / m as f64;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("axis values are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    let stderr = if m > 2 { (sse / (m - 2) as f64 / sxx).sqrt() } else { 0.0 };
    Ok((slope, intercept, r2, stderr))
}

/// Fits `mean_gap ~ C * axis^exponent`. Rows with non-finite or
/// nonpositive gaps are dropped; at least 4 must remain. If the fit has
/// `r^2 < 0.98` the smallest axis value is dropped once and the fit redone.
pub fn fit_rate(rows: &[SweepRow]) -> Result<RateFit> {
    let (good, bad): (Vec<&SweepRow>, Vec<&SweepRow>) =
        rows.iter().partition(|r| r.mean_gap.is_finite() && r.mean_gap > 0.0 && r.axis_value > 0.0);
    let mut excluded: Vec<f64> = bad.iter().map(|r| r.axis_value).collect();
    if good.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 finite points, got {}", good.len())));
    }
    let mut good = good;
    good.sort_by(|a, b| a.axis_value.total_cmp(&b.axis_value));
    let xs: Vec<f64> = good.iter().map(|r| r.axis_value).collect();
    let ys: Vec<f64> = good.iter().map(|r| r.mean_gap).collect();
    let (mut fit, mut used) = (loglog_ols(&xs, &ys)?, xs.len());
    if fit.2 < 0.98 {
        info!("fit_rate: r^2 = {:.4} < 0.98, dropping axis value {}", fit.2, xs[0]);
        excluded.push(xs[0]);
        fit = loglog_ols(&xs[1..], &ys[1..])?;
        used -= 1;
    }
    let (exponent, intercept, r_squared, stderr) = fit;
    Ok(RateFit { exponent, intercept, r_squared, stderr, excluded, points: used })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub axis: Axis,
    pub axis_values: Vec<f64>,
    pub rows_a: Vec<SweepRow>,
    pub rows_b: Vec<SweepRow>,
    /// `mean_gap_b / mean_gap_a` per axis value.
    pub gap_ratio: Vec<f64>,
    pub fit_a: Option<RateFit>,
    pub fit_b: Option<RateFit>,
}

/// Runs two sweeps that differ only in policy or step size and reports
/// them side by side. Fits are omitted when a sweep has too few points.
pub fn compare_policies(a: &SweepSpec, b: &SweepSpec) -> Result<CompareReport> {
    if a.axis != b.axis || a.axis_values != b.axis_values || a.objective != b.objective || a.epochs != b.epochs {
        return Err(Error::Contract("compared sweeps must share objective, axis, axis values and epochs".into()));
    }
    let rows_a = run_sweep(a)?;
    let rows_b = run_sweep(b)?;
    let gap_ratio = rows_a.iter().zip(&rows_b).map(|(x, y)| y.mean_gap / x.mean_gap).collect();
    Ok(CompareReport {
        axis: a.axis,
        axis_values: a.axis_values.clone(),
        fit_a: fit_rate(&rows_a).ok(),
        fit_b: fit_rate(&rows_b).ok(),
        rows_a,
        rows_b,
        gap_ratio,
    })
}

/// Per-epoch mean and standard error of one coordinate of `x_0^k`,
/// `k = 1..=K+1`, over `seeds` runs of the given policy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoordinatePath {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub diverged: usize,
}

/// Runs are processed in fixed-size chunks whose partial sums are added in
/// chunk order, so the result does not depend on the thread count.
pub fn coordinate_path(
    obj: &FiniteSumObjective,
    policy: &PermutationPolicy,
    eta: f64,
    epochs: usize,
    coord: usize,
    seeds: usize,
    master_seed: u64,
) -> Result<CoordinatePath> {
    if coord >= obj.dim() || seeds == 0 {
        return param("coordinate out of range or no seeds");
    }
    const CHUNK: usize = 8;
    let len = epochs + 1;
    let mut sum = vec![0.0; len];
    let mut sq = vec![0.0; len];
    let mut diverged = 0;
    let chunks: Vec<(usize, usize)> = (0..seeds).step_by(CHUNK).map(|s| (s, (s + CHUNK).min(seeds))).collect();
    let wave = rayon::current_num_threads().max(1);
    for group in chunks.chunks(wave) {
        let parts = group
            .par_iter()
            .map(|&(lo, hi)| -> Result<(Vec<f64>, Vec<f64>, usize)> {
                let mut s = vec![0.0; len];
                let mut q = vec![0.0; len];
                let mut div = 0;
                for i in lo..hi {
                    let seed = derive_seed(master_seed, eta, i as u64);
                    let cfg = RunConfig::new(obj, policy.reseeded(seed), eta, epochs).with_record(Record::Nothing);
                    let t = run_epochs_observed(cfg, |k, x| {
                        s[k - 1] += x[coord];
                        q[k - 1] += x[coord] * x[coord];
                    })?;
                    div += t.diverged as usize;
                }
                Ok((s, q, div))
            })
            .collect::<Result<Vec<_>>>()?;
        for (s, q, div) in parts {
            sum.iter_mut().zip(&s).for_each(|(a, b)| *a += b);
            sq.iter_mut().zip(&q).for_each(|(a, b)| *a += b);
            diverged += div;
        }
    }
    let m = seeds as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let stderr = sq
        .iter()
        .zip(&mean)
        .map(|(q, mu)| if seeds > 1 { ((q / m - mu * mu).max(0.0) * m / (m - 1.0) / m).sqrt() } else { 0.0 })
        .collect();
    Ok(CoordinatePath { mean, stderr, diverged })
}
