//! Herding: order centred vectors so that every prefix sum stays short.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

/// `n` vectors of dimension `d`, stored row-major, summing to zero and with
/// norms at most one (both up to `tolerance`).
#[derive(Clone, Debug, PartialEq)]
pub struct VectorBatch {
    data: Vec<f64>,
    n: usize,
    d: usize,
    tolerance: f64,
}

impl VectorBatch {
    pub fn new(rows: &[Vec<f64>], tolerance: f64) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Contract("rows must share one dimension".into()));
        }
        Self::from_flat(rows.concat(), rows.len(), d, tolerance)
    }

    pub fn from_flat(data: Vec<f64>, n: usize, d: usize, tolerance: f64) -> Result<Self> {
        if n == 0 || d == 0 || data.len() != n * d {
            return Err(Error::Contract(format!("expected {n}x{d} entries, got {}", data.len())));
        }
        let batch = Self { data, n, d, tolerance };
        let sum = batch.total();
        if norm(&sum) > tolerance {
            return Err(Error::Contract(format!("batch sums to norm {} > {tolerance}", norm(&sum))));
        }
        let widest = (0..n).map(|i| norm(batch.row(i))).fold(0.0, f64::max);
        if widest > 1.0 + tolerance {
            return Err(Error::Contract(format!("vector norm {widest} exceeds 1")));
        }
        Ok(batch)
    }

    /// Subtracts the mean and divides by the largest resulting norm (left
    /// unscaled when every vector is zero). Returns the batch and the scale.
    pub fn centered_normalized(rows: &[Vec<f64>]) -> Result<(Self, f64)> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if n == 0 || d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::Contract("need a nonempty rectangular batch".into()));
        }
        let mut mean = vec![0.0; d];
        for r in rows {
            mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut data: Vec<f64> = rows.iter().flat_map(|r| r.iter().zip(&mean).map(|(v, m)| v - m)).collect();
        let scale = data.chunks(d).map(norm).fold(0.0, f64::max);
        if scale > 0.0 {
            data.iter_mut().for_each(|v| *v /= scale);
        }
        let tol = 1e-9 * (n as f64).max(1.0);
        Ok((Self::from_flat(data, n, d, tol)?, scale))
    }

    /// `n` Gaussian-direction unit vectors in `R^d`, then centred and
    /// normalised as in [`Self::centered_normalized`].
    pub fn random_unit(n: usize, d: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                let r = norm(&v);
                v.iter_mut().for_each(|a| *a /= r);
                v
            })
            .collect();
        Ok(Self::centered_normalized(&rows)?.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    fn total(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.d];
        for i in 0..self.n {
            s.iter_mut().zip(self.row(i)).for_each(|(a, b)| *a += b);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HerdingResult {
    pub order: Vec<usize>,
    /// Largest prefix-sum norm under `order`.
    pub achieved_h: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn finish(batch: &VectorBatch, order: Vec<usize>) -> HerdingResult {
    let achieved_h = profile_unchecked(batch, &order).into_iter().fold(0.0, f64::max);
    HerdingResult { order, achieved_h }
}

/// Greedy herding: repeatedly append the unused vector that makes the new
/// prefix sum shortest. Ties go to the lowest index.
pub fn herd_greedy(batch: &VectorBatch) -> HerdingResult {
    let (n, d) = (batch.n, batch.d);
    let sq: Vec<f64> = (0..n).map(|i| batch.row(i).iter().map(|v| v * v).sum()).collect();
    let mut used = vec![false; n];
    let mut prefix = vec![0.0; d];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best = usize::MAX;
        let mut best_val = f64::INFINITY;
        for i in (0..n).filter(|&i| !used[i]) {
            let dot: f64 = prefix.iter().zip(batch.row(i)).map(|(a, b)| a * b).sum();
            let val = 2.0 * dot + sq[i];
            if val < best_val || best == usize::MAX {
                best = i;
                best_val = val;
            }
        }
        used[best] = true;
        prefix.iter_mut().zip(batch.row(best)).for_each(|(a, b)| *a += b);
        order.push(best);
    }
    finish(batch, order)
}

/// Self-balancing walk: each vector gets sign `+1` with probability
/// `1/2 - <w, z>/(2c)`, clipped to `[0, 1]`, where `w` is the signed running
/// sum. The order lists `+1` vectors first, then `-1` vectors reversed.
pub fn herd_signwalk(batch: &VectorBatch, rng_seed: u64) -> HerdingResult {
    let (n, d) = (batch.n, batch.d);
    let c = SIGNWALK_C * (2.0 * n as f64).ln().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut walk = vec![0.0; d];
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for i in 0..n {
        let z = batch.row(i);
        let dot: f64 = walk.iter().zip(z).map(|(a, b)| a * b).sum();
        let p = (0.5 - dot / (2.0 * c)).clamp(0.0, 1.0);
        let s = if rng.gen::<f64>() < p { 1.0 } else { -1.0 };
        walk.iter_mut().zip(z).for_each(|(a, b)| *a += s * b);
        if s > 0.0 {
            plus.push(i);
        } else {
            minus.push(i);
        }
    }
    plus.extend(minus.into_iter().rev());
    finish(batch, plus)
}

/// Walk threshold factor; the threshold is `SIGNWALK_C * ln(2n)`.
pub const SIGNWALK_C: f64 = 1.0;

fn profile_unchecked(batch: &VectorBatch, order: &[usize]) -> Vec<f64> {
    let mut s = vec![0.0; batch.d];
    order
        .iter()
        .map(|&i| {
            s.iter_mut().zip(batch.row(i)).for_each(|(a, b)| *a += b);
            norm(&s)
        })
        .collect()
}

/// Prefix-sum norms `|z_order(1) + ... + z_order(k)|` for `k = 1..n`.
pub fn prefix_norm_profile(batch: &VectorBatch, order: &[usize]) -> Result<Vec<f64>> {
    if !is_permutation(order, batch.n) {
        return Err(Error::Contract("order is not a permutation of the batch".into()));
    }
    Ok(profile_unchecked(batch, order))
}

pub(crate) fn is_permutation(order: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    order.len() == n && order.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}
