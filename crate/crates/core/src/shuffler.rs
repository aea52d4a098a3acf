//! Per-epoch permutation policies.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herding::{herd_greedy, herd_signwalk, is_permutation, VectorBatch};

/// Largest `n` accepted by [`enumerate_all_orders`].
pub const MAX_ENUM_N: usize = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HerdingVariant {
    #[default]
    Greedy,
    Signwalk,
}

impl std::str::FromStr for HerdingVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Self::Greedy),
            "signwalk" => Ok(Self::Signwalk),
            _ => Err(Error::Parameter(format!("unknown herding variant `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PolicyKind {
    RandomReshuffle,
    /// Shuffle once, then reuse that order every epoch.
    SingleShuffle,
    Incremental,
    /// Offline GraB: herd the previous epoch's centred gradients.
    GrabOffline {
        herding: HerdingVariant,
        initial_order: Option<Vec<usize>>,
    },
    Fixed(Vec<usize>),
    ExhaustiveBest,
    ExhaustiveWorst,
}

#[derive(Clone, Debug)]
pub struct PermutationPolicy {
    kind: PolicyKind,
    seed: u64,
    rng: ChaCha8Rng,
    frozen: Option<Vec<usize>>,
    /// Centred gradients keyed by component id.
    stored: Option<Vec<Vec<f64>>>,
    plan: Option<Vec<Vec<usize>>>,
}

impl PermutationPolicy {
    pub fn new(kind: PolicyKind, seed: u64) -> Self {
        Self { kind, seed, rng: ChaCha8Rng::seed_from_u64(seed), frozen: None, stored: None, plan: None }
    }

    pub fn random_reshuffle(seed: u64) -> Self {
        Self::new(PolicyKind::RandomReshuffle, seed)
    }

    pub fn incremental() -> Self {
        Self::new(PolicyKind::Incremental, 0)
    }

    pub fn grab(herding: HerdingVariant, seed: u64) -> Self {
        Self::new(PolicyKind::GrabOffline { herding, initial_order: None }, seed)
    }

    /// Policy from its CLI key: `rr`, `single_shuffle`, `incremental`, `grab`,
    /// `fixed`, `best` or `worst`. `order` is required for `fixed` and is the
    /// first-epoch order for `grab`.
    pub fn from_key(key: &str, seed: u64, herding: HerdingVariant, order: Option<Vec<usize>>) -> Result<Self> {
        let kind = match key {
            "rr" | "random_reshuffle" => PolicyKind::RandomReshuffle,
            "single_shuffle" => PolicyKind::SingleShuffle,
            "incremental" => PolicyKind::Incremental,
            "grab" | "grab_offline" => PolicyKind::GrabOffline { herding, initial_order: order },
            "fixed" => PolicyKind::Fixed(order.ok_or_else(|| Error::Parameter("fixed policy needs an order".into()))?),
            "best" | "exhaustive_best" => PolicyKind::ExhaustiveBest,
            "worst" | "exhaustive_worst" => PolicyKind::ExhaustiveWorst,
            other => return Err(Error::Parameter(format!("unknown policy `{other}`"))),
        };
        Ok(Self::new(kind, seed))
    }

    pub fn kind(&self) -> &PolicyKind {
        &self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Same policy, fresh state, new seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self::new(self.kind.clone(), seed)
    }

    pub fn wants_gradients(&self) -> bool {
        matches!(self.kind, PolicyKind::GrabOffline { .. })
    }

    pub fn is_exhaustive(&self) -> bool {
        matches!(self.kind, PolicyKind::ExhaustiveBest | PolicyKind::ExhaustiveWorst)
    }

    /// Installs the per-epoch orders an exhaustive policy replays.
    pub fn set_plan(&mut self, plan: Vec<Vec<usize>>) {
        self.plan = Some(plan);
    }

    /// Order for epoch `epoch` (1-based).
    pub fn next_permutation(&mut self, epoch: usize, n: usize) -> Result<Vec<usize>> {
        let mut buf = Vec::with_capacity(n);
        self.fill_permutation(epoch, n, &mut buf)?;
        Ok(buf)
    }

    /// Writes the order for epoch `epoch` (1-based) into `buf`.
    pub fn fill_permutation(&mut self, epoch: usize, n: usize, buf: &mut Vec<usize>) -> Result<()> {
        let order = match &self.kind {
            PolicyKind::Incremental | PolicyKind::RandomReshuffle => {
                buf.clear();
                buf.extend(0..n);
                if self.kind == PolicyKind::RandomReshuffle {
                    if n <= 20 {
                        lehmer_shuffle(buf, &mut self.rng);
                    } else {
                        buf.shuffle(&mut self.rng);
                    }
                }
                return Ok(());
            }
            PolicyKind::SingleShuffle => {
                if self.frozen.is_none() {
                    let mut p: Vec<usize> = (0..n).collect();
                    p.shuffle(&mut self.rng);
                    self.frozen = Some(p);
                }
                self.frozen.clone().unwrap_or_default()
            }
            PolicyKind::Fixed(order) => order.clone(),
            PolicyKind::GrabOffline { herding, initial_order } => match &self.stored {
                Some(centered) if epoch > 1 => {
                    let (batch, _) = VectorBatch::centered_normalized(centered)?;
                    match herding {
                        HerdingVariant::Greedy => herd_greedy(&batch).order,
                        HerdingVariant::Signwalk => {
                            let seed = self.seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                            herd_signwalk(&batch, seed).order
                        }
                    }
                }
                _ => initial_order.clone().unwrap_or_else(|| (0..n).collect()),
            },
            PolicyKind::ExhaustiveBest | PolicyKind::ExhaustiveWorst => self
                .plan
                .as_ref()
                .and_then(|p| p.get(epoch - 1))
                .cloned()
                .ok_or_else(|| Error::Contract(format!("exhaustive policy has no plan for epoch {epoch}")))?,
        };
        if !is_permutation(&order, n) {
            return Err(Error::Contract(format!("policy produced an invalid order for n = {n}")));
        }
        *buf = order;
        Ok(())
    }

    /// Stores `z_i - mean(z)` by component id. `grads[i]` is the gradient
    /// taken at step `i`, i.e. of component `order[i]`. No-op unless GraB.
    pub fn record_gradients(&mut self, order: &[usize], grads: &[Vec<f64>]) -> Result<()> {
        if !self.wants_gradients() {
            return Ok(());
        }
        let n = order.len();
        let d = grads.first().map_or(0, Vec::len);
        if grads.len() != n || d == 0 || grads.iter().any(|g| g.len() != d) || !is_permutation(order, n) {
            return Err(Error::Contract("gradient matrix does not match the visit order".into()));
        }
        let mut by_id = vec![Vec::new(); n];
        for (pos, &id) in order.iter().enumerate() {
            by_id[id] = grads[pos].clone();
        }
        let mut mean = vec![0.0; d];
        for g in &by_id {
            mean.iter_mut().zip(g).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        by_id.iter_mut().for_each(|g| g.iter_mut().zip(&mean).for_each(|(v, m)| *v -= m));
        self.stored = Some(by_id);
        Ok(())
    }

    pub fn stored_gradients(&self) -> Option<&[Vec<f64>]> {
        self.stored.as_deref()
    }
}

/// Uniform shuffle from a single draw of an index below `n!`, read as
/// mixed-radix Fisher-Yates digits. Needs `n <= 20` so `n!` fits in a `u64`.
fn lehmer_shuffle(buf: &mut [usize], rng: &mut ChaCha8Rng) {
    let n = buf.len();
    if n <= 12 {
        // 12! < 2^32; 32-bit division is markedly cheaper.
        let total: u32 = (2..=n as u32).product();
        let mut r = rng.gen_range(0..total);
        for i in (1..n).rev() {
            let radix = i as u32 + 1;
            buf.swap(i, (r % radix) as usize);
            r /= radix;
        }
        return;
    }
    let total: u64 = (2..=n as u64).product();
    let mut r = rng.gen_range(0..total);
    for i in (1..n).rev() {
        let radix = i as u64 + 1;
        buf.swap(i, (r % radix) as usize);
        r /= radix;
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn enumerate_all_orders(n: usize) -> Result<LexPermutations> {
    if n == 0 || n > MAX_ENUM_N {
        return Err(Error::Guardrail(format!("enumeration needs 1 <= n <= {MAX_ENUM_N}, got {n}")));
    }
    Ok(LexPermutations { next: Some((0..n).collect()) })
}

pub struct LexPermutations {
    next: Option<Vec<usize>>,
}

impl Iterator for LexPermutations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut p = current.clone();
        if let Some(i) = (0..p.len().saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) {
            let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).unwrap_or(i + 1);
            p.swap(i, j);
            p[i + 1..].reverse();
            self.next = Some(p);
        }
        Some(current)
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
