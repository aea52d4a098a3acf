//! Constant-step permutation SGD, averaging, and step-size schedules.

mod lambert;
mod schedule;

pub use lambert::lambert_w0;
pub use schedule::{grab_w_argument, stepsize_grab, stepsize_mishchenko_strcvx, stepsize_tail_average};

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::objectives::{norm, FiniteSumObjective};
use crate::oracle;
use crate::shuffler::{PermutationPolicy, PolicyKind};

/// Iterates with norm above this are treated as diverged.
pub const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Record {
    /// Keep `x_0^k` for every epoch plus the orders used.
    #[default]
    EndOfEpoch,
    /// Also keep every inner iterate.
    Everything,
    /// Keep only the first and last point; use an observer for the rest.
    Nothing,
}

#[derive(Clone, Debug)]
pub struct RunConfig<'a> {
    pub objective: &'a FiniteSumObjective,
    pub policy: PermutationPolicy,
    pub eta: f64,
    pub epochs: usize,
    pub x0: Vec<f64>,
    pub record: Record,
}

impl<'a> RunConfig<'a> {
    /// Starts from the objective's prescribed point, recording end-of-epoch iterates.
    pub fn new(objective: &'a FiniteSumObjective, policy: PermutationPolicy, eta: f64, epochs: usize) -> Self {
        Self { objective, policy, eta, epochs, x0: objective.default_x0(), record: Record::EndOfEpoch }
    }

    pub fn with_x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = x0;
        self
    }

    pub fn with_record(mut self, record: Record) -> Self {
        self.record = record;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return param(format!("eta must be positive, got {}", self.eta));
        }
        if self.epochs == 0 {
            return param("need at least one epoch");
        }
        if self.x0.len() != self.objective.dim() {
            return param(format!("x0 has length {}, objective dimension is {}", self.x0.len(), self.objective.dim()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochTrace {
    /// Row `k` (0-based) is the start of epoch `k + 1`; the last row is the
    /// final iterate. Has `K + 1` rows unless the run diverged or recorded nothing.
    pub end_points: Vec<Vec<f64>>,
    pub permutations_used: Vec<Vec<usize>>,
    /// Inner iterates `x_i^k`, epoch-major, when recording everything.
    pub iterates: Vec<Vec<f64>>,
    pub seed: u64,
    pub diverged: bool,
    /// Epochs actually completed.
    pub epochs_run: usize,
    /// Gradient evaluations per component id.
    pub grad_evals: Vec<usize>,
}

impl EpochTrace {
    pub fn final_point(&self) -> &[f64] {
        self.end_points.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Runs `K` epochs of `x <- x - eta * grad f_{sigma_k(i)}(x)`.
pub fn run_epochs(config: RunConfig<'_>) -> Result<EpochTrace> {
    run_epochs_observed(config, |_, _| {})
}

/// Like [`run_epochs`], calling `observe(k, x_0^k)` for `k = 1..=K+1` (or up
/// to the epoch where divergence was detected).
pub fn run_epochs_observed(config: RunConfig<'_>, mut observe: impl FnMut(usize, &[f64])) -> Result<EpochTrace> {
    config.validate()?;
    let RunConfig { objective, mut policy, eta, epochs, x0, record } = config;
    let (n, d) = (objective.n(), objective.dim());
    if policy.is_exhaustive() {
        let best = matches!(policy.kind(), PolicyKind::ExhaustiveBest);
        let scheme = AveragingScheme::final_iterate(epochs);
        let ex = oracle::exhaustive_permutation_value(objective, &x0, eta, epochs, &scheme)?;
        policy.set_plan(if best { ex.argmin } else { ex.argmax });
    }
    let mut trace = EpochTrace {
        end_points: vec![x0.clone()],
        permutations_used: Vec::new(),
        iterates: Vec::new(),
        seed: policy.seed(),
        diverged: false,
        epochs_run: 0,
        grad_evals: vec![0; n],
    };
    let wants_grads = policy.wants_gradients();
    let mut grads = if wants_grads { vec![vec![0.0; d]; n] } else { Vec::new() };
    let mut order = Vec::with_capacity(n);
    let mut x = x0;
    observe(1, &x);
    for k in 1..=epochs {
        policy.fill_permutation(k, n, &mut order)?;
        for (pos, &i) in order.iter().enumerate() {
            let c = objective.component(i);
            if wants_grads {
                let g = &mut grads[pos];
                c.grad_into(&x, g);
                x.iter_mut().zip(g.iter()).for_each(|(xj, gj)| *xj -= eta * gj);
            } else {
                c.step(&mut x, eta);
            }
            if record == Record::Everything {
                trace.iterates.push(x.clone());
            }
        }
        if wants_grads {
            policy.record_gradients(&order, &grads)?;
        }
        if record != Record::Nothing {
            trace.permutations_used.push(order.clone());
        }
        trace.epochs_run = k;
        trace.grad_evals.iter_mut().for_each(|g| *g += 1);
        let bad = x.iter().any(|v| !v.is_finite()) || norm(&x) > DIVERGENCE_NORM;
        if bad {
            trace.diverged = true;
            trace.end_points.push(x);
            return Ok(trace);
        }
        observe(k + 1, &x);
        if record != Record::Nothing || k == epochs {
            trace.end_points.push(x.clone());
        }
    }
    Ok(trace)
}

/// Nonnegative weights `alpha_1, ..., alpha_{K+1}` over end-of-epoch iterates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragingScheme {
    weights: Vec<f64>,
}

impl AveragingScheme {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return param("averaging weights must be nonnegative and finite");
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Contract("averaging weights must not all be zero".into()));
        }
        Ok(Self { weights })
    }

    /// `alpha_{K+1} = 1`, all others zero.
    pub fn final_iterate(k: usize) -> Self {
        let mut weights = vec![0.0; k + 1];
        weights[k] = 1.0;
        Self { weights }
    }

    /// `alpha_1 = 0`, all others one.
    pub fn average_iterate(k: usize) -> Self {
        let mut weights = vec![1.0; k + 1];
        if k > 0 {
            weights[0] = 0.0;
        }
        Self { weights }
    }

    /// `alpha_k = 1` for `ceil(K/2) + 1 <= k <= K + 1` (1-based).
    pub fn tail(k: usize) -> Self {
        let start = k.div_ceil(2);
        let weights = (0..=k).map(|i| if i >= start { 1.0 } else { 0.0 }).collect();
        Self { weights }
    }

    /// `final`, `average` or `tail`.
    pub fn from_key(key: &str, k: usize) -> Result<Self> {
        match key {
            "final" => Ok(Self::final_iterate(k)),
            "average" => Ok(Self::average_iterate(k)),
            "tail" => Ok(Self::tail(k)),
            other => param(format!("unknown averaging scheme `{other}`")),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `sum_k alpha_k x_0^k / sum_k alpha_k`.
pub fn weighted_average(trace: &EpochTrace, scheme: &AveragingScheme) -> Result<Vec<f64>> {
    if scheme.weights.len() != trace.end_points.len() {
        return Err(Error::Contract(format!(
            "scheme has {} weights for {} end points",
            scheme.weights.len(),
            trace.end_points.len()
        )));
    }
    average_points(&trace.end_points, &scheme.weights)
}

pub(crate) fn average_points(points: &[Vec<f64>], weights: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Contract("averaging weights must not all be zero".into()));
    }
    let d = points.first().map_or(0, Vec::len);
    let mut acc = vec![0.0; d];
    for (p, &w) in points.iter().zip(weights) {
        if w != 0.0 {
            acc.iter_mut().zip(p).for_each(|(a, v)| *a += w * v);
        }
    }
    acc.iter_mut().for_each(|a| *a /= total);
    Ok(acc)
}
