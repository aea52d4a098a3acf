//! Finite-sum objectives and the worst-case constructions.
//!
//! Every component is a separable piecewise quadratic: on coordinate `j` it is
//! `c_j(x_j) x_j^2 / 2 + b_j x_j`, where the curvature `c_j` may differ on the
//! two sides of zero. That family covers all constructions below, keeps the
//! gradient C¹, and makes single SGD steps cheap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{param, Error, Result};

/// Condition-number threshold of the random-reshuffling lower bound; also the
/// ratio `L / mu0` of the piecewise block.
pub const C1: f64 = 2415.0;
/// Middle step-size regime ends at `1 / (C2 L n)`.
pub const C2: f64 = 161.0;
/// Scale of the initial offset of the piecewise block.
pub const INIT_FACTOR: f64 = 1.0 / 27000.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentFn {
    curv_neg: Vec<f64>,
    curv_pos: Vec<f64>,
    lin: Vec<f64>,
    offset: f64,
}

impl ComponentFn {
    pub fn new(curv_neg: Vec<f64>, curv_pos: Vec<f64>, lin: Vec<f64>, offset: f64) -> Result<Self> {
        if curv_neg.is_empty() || curv_neg.len() != curv_pos.len() || curv_neg.len() != lin.len() {
            return param("component coefficient vectors must share a positive length");
        }
        Ok(Self { curv_neg, curv_pos, lin, offset })
    }

    /// `sum_j a_j x_j^2 / 2 + b_j x_j`.
    pub fn quadratic(curv: Vec<f64>, lin: Vec<f64>) -> Result<Self> {
        Self::new(curv.clone(), curv, lin, 0.0)
    }

    /// One-dimensional `(a_neg 1{x<0} + a_pos 1{x>=0}) x^2 / 2 + b x`.
    pub fn scalar(a_neg: f64, a_pos: f64, b: f64) -> Self {
        Self { curv_neg: vec![a_neg], curv_pos: vec![a_pos], lin: vec![b], offset: 0.0 }
    }

    pub fn zero(dim: usize) -> Self {
        Self { curv_neg: vec![0.0; dim], curv_pos: vec![0.0; dim], lin: vec![0.0; dim], offset: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.lin.len()
    }

    #[inline]
    fn curv(&self, j: usize, xj: f64) -> f64 {
        if xj < 0.0 {
            self.curv_neg[j]
        } else {
            self.curv_pos[j]
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.offset;
        for (j, &xj) in x.iter().enumerate() {
            v += 0.5 * self.curv(j, xj) * xj * xj + self.lin[j] * xj;
        }
        v
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.grad_into(x, &mut g);
        g
    }

    #[inline]
    pub fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        for (j, &xj) in x.iter().enumerate() {
            out[j] = self.curv(j, xj) * xj + self.lin[j];
        }
    }

    /// In-place SGD step `x <- x - eta * grad(x)`.
    #[inline]
    pub fn step(&self, x: &mut [f64], eta: f64) {
        if let ([xj], [a_neg], [a_pos], [b]) = (&mut *x, &self.curv_neg[..], &self.curv_pos[..], &self.lin[..]) {
            let a = if *xj < 0.0 { *a_neg } else { *a_pos };
            *xj -= eta * (a * *xj + b);
            return;
        }
        let coefs = self.curv_neg.iter().zip(&self.curv_pos).zip(&self.lin);
        for (xj, ((&a_neg, &a_pos), &b)) in x.iter_mut().zip(coefs) {
            let a = if *xj < 0.0 { a_neg } else { a_pos };
            *xj -= eta * (a * *xj + b);
        }
    }

    /// True when the curvature does not switch at zero on any coordinate.
    pub fn is_quadratic(&self) -> bool {
        self.curv_neg == self.curv_pos
    }

    /// Diagonal curvature and linear term, defined only for quadratic components.
    pub fn affine_parts(&self) -> Option<(&[f64], &[f64])> {
        self.is_quadratic().then_some((self.curv_pos.as_slice(), self.lin.as_slice()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let m = |v: &[f64]| v.iter().map(|a| a * s).collect::<Vec<_>>();
        Self { curv_neg: m(&self.curv_neg), curv_pos: m(&self.curv_pos), lin: m(&self.lin), offset: self.offset * s }
    }

    /// The one-dimensional piece acting on coordinate `j` (offset dropped).
    pub fn coordinate(&self, j: usize) -> Self {
        Self::scalar(self.curv_neg[j], self.curv_pos[j], self.lin[j])
    }

    /// Direct sum over disjoint coordinate blocks.
    pub fn concat(&self, other: &Self) -> Self {
        let cat = |a: &[f64], b: &[f64]| a.iter().chain(b).copied().collect::<Vec<_>>();
        Self {
            curv_neg: cat(&self.curv_neg, &other.curv_neg),
            curv_pos: cat(&self.curv_pos, &other.curv_pos),
            lin: cat(&self.lin, &other.lin),
            offset: self.offset + other.offset,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    #[serde(rename = "L")]
    pub l: f64,
    pub mu: f64,
    pub tau: f64,
    pub nu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionClass {
    /// Smooth, strongly convex objective with bounded gradient error.
    #[serde(rename = "F")]
    StronglyConvex,
    /// Smooth objective satisfying the PŁ inequality.
    #[serde(rename = "F_PL")]
    Pl,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiniteSumObjective {
    pub name: String,
    components: Vec<ComponentFn>,
    pub constants: Constants,
    pub x_star: Vec<f64>,
    pub f_star: f64,
    pub class: FunctionClass,
    /// Starting point prescribed by the construction, if any.
    pub init: Option<Vec<f64>>,
}

impl FiniteSumObjective {
    pub fn new(
        name: impl Into<String>,
        components: Vec<ComponentFn>,
        constants: Constants,
        x_star: Vec<f64>,
        f_star: f64,
        class: FunctionClass,
    ) -> Result<Self> {
        let Some(first) = components.first() else {
            return param("objective needs at least one component");
        };
        let dim = first.dim();
        if components.iter().any(|c| c.dim() != dim) || x_star.len() != dim {
            return param("components and optimum must share one dimension");
        }
        Ok(Self { name: name.into(), components, constants, x_star, f_star, class, init: None })
    }

    pub fn with_init(mut self, init: Vec<f64>) -> Result<Self> {
        if init.len() != self.dim() {
            return param(format!("init has length {}, expected {}", init.len(), self.dim()));
        }
        self.init = Some(init);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn components(&self) -> &[ComponentFn] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ComponentFn {
        &self.components[i]
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.components.iter().map(|c| c.eval(x)).sum::<f64>() / self.n() as f64
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim()];
        let mut g = vec![0.0; self.dim()];
        for c in &self.components {
            c.grad_into(x, &mut g);
            acc.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        }
        let n = self.n() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    pub fn gap(&self, x: &[f64]) -> f64 {
        self.value(x) - self.f_star
    }

    pub fn is_quadratic(&self) -> bool {
        self.components.iter().all(ComponentFn::is_quadratic)
    }

    /// The one-dimensional objective seen by coordinate `j`. Every objective
    /// here is coordinate-separable, so running it reproduces coordinate `j`
    /// of a full run bit for bit.
    pub fn restrict(&self, j: usize) -> Result<Self> {
        if j >= self.dim() {
            return param(format!("coordinate {j} out of range for dimension {}", self.dim()));
        }
        let comps = self.components.iter().map(|c| c.coordinate(j)).collect();
        let mut obj =
            Self::new(format!("{}[{j}]", self.name), comps, self.constants, vec![self.x_star[j]], 0.0, self.class)?;
        obj.f_star = obj.value(&obj.x_star);
        obj.init = self.init.as_ref().map(|x| vec![x[j]]);
        Ok(obj)
    }

    /// Starting point: the construction's own, or the origin.
    pub fn default_x0(&self) -> Vec<f64> {
        self.init.clone().unwrap_or_else(|| vec![0.0; self.dim()])
    }

    /// Samples the declared-constant inequalities at random points.
    pub fn audit(&self, samples: usize, scale: f64, seed: u64) -> Audit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = self.dim();
        let c = self.constants;
        let mut audit = Audit { optimum_grad_norm: norm(&self.grad(&self.x_star)), ..Audit::default() };
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..d).map(|j| self.x_star[j] + scale * rng.gen_range(-1.0..1.0)).collect()
        };
        for _ in 0..samples {
            let x = draw(&mut rng);
            let y = draw(&mut rng);
            let gf = self.grad(&x);
            let gf_norm = norm(&gf);
            for comp in &self.components {
                let gi = comp.grad(&x);
                let dev = dist(&gi, &gf) - (c.tau * gf_norm + c.nu);
                audit.assumption1_excess = audit.assumption1_excess.max(dev);
                let lip = dist(&gi, &comp.grad(&y)) - c.l * dist(&x, &y);
                audit.smoothness_excess = audit.smoothness_excess.max(lip);
                if x.iter().all(|v| v.abs() > 1e-6) {
                    audit.fd_rel_err = audit.fd_rel_err.max(fd_error(comp, &x, &gi));
                }
            }
            if self.class == FunctionClass::Pl {
                let deficit = c.mu * self.gap(&x) - 0.5 * gf_norm * gf_norm;
                audit.pl_deficit = audit.pl_deficit.max(deficit);
            }
        }
        audit
    }
}

/// Worst observed violations from [`FiniteSumObjective::audit`]; values at or
/// below zero mean the inequality held.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Audit {
    pub optimum_grad_norm: f64,
    pub assumption1_excess: f64,
    pub smoothness_excess: f64,
    pub pl_deficit: f64,
    pub fd_rel_err: f64,
}

impl Audit {
    pub fn passes(&self) -> bool {
        self.optimum_grad_norm <= 1e-12
            && self.assumption1_excess <= 1e-9
            && self.smoothness_excess <= 1e-9
            && self.pl_deficit <= 1e-9
            && self.fd_rel_err <= 1e-5
    }
}

fn fd_error(comp: &ComponentFn, x: &[f64], g: &[f64]) -> f64 {
    let mut xp = x.to_vec();
    let mut worst: f64 = 0.0;
    for j in 0..x.len() {
        let h = 1e-6 * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        let fp = comp.eval(&xp);
        xp[j] = x[j] - h;
        let fm = comp.eval(&xp);
        xp[j] = x[j];
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((fd - g[j]).abs() / g[j].abs().max(1.0));
    }
    worst
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Balanced ±1 pattern; entry `i` is the sign of the linear term of the
/// component visited at position `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignPattern {
    signs: Vec<i8>,
}

impl SignPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.len() % 2 != 0 {
            return param("sign pattern length must be even");
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return param("sign pattern entries must be +1 or -1");
        }
        if signs.iter().map(|&s| s as i64).sum::<i64>() != 0 {
            return param("sign pattern must contain as many +1 as -1");
        }
        Ok(Self { signs })
    }

    /// Pattern induced by visiting components in `order`, where the first
    /// `n/2` component ids carry `+1`.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        let half = order.len() / 2;
        Self::new(order.iter().map(|&i| if i < half { 1 } else { -1 }).collect())
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Prefix sums `E_1, ..., E_n`.
    pub fn partial_sums(&self) -> Vec<i64> {
        self.signs
            .iter()
            .scan(0i64, |acc, &s| {
                *acc += s as i64;
                Some(*acc)
            })
            .collect()
    }
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        param(format!("{name} must be positive and finite, got {v}"))
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        param(format!("{name} must be nonnegative and finite, got {v}"))
    }
}

fn check_even(n: usize) -> Result<()> {
    if n == 0 || n % 2 != 0 {
        return param(format!("n must be even and positive, got {n}"));
    }
    Ok(())
}

/// Half `+nu`, half `-nu` linear terms around a shared piecewise curvature.
fn signed_family(n: usize, a_neg: f64, a_pos: f64, nu: f64) -> Vec<ComponentFn> {
    (0..n)
        .map(|i| {
            let s = if i < n / 2 { 1.0 } else { -1.0 };
            ComponentFn::scalar(a_neg, a_pos, s * nu)
        })
        .collect()
}

pub fn make_f1_quadratic(mu: f64, dim: usize, n: usize) -> Result<FiniteSumObjective> {
    check_pos("mu", mu)?;
    if dim == 0 || n == 0 {
        return param("dim and n must be positive");
    }
    let comp = ComponentFn::quadratic(vec![mu; dim], vec![0.0; dim])?;
    FiniteSumObjective::new(
        "f1_quadratic",
        vec![comp; n],
        Constants { l: mu, mu, tau: 0.0, nu: 0.0 },
        vec![0.0; dim],
        0.0,
        FunctionClass::StronglyConvex,
    )
}

pub fn make_f2_piecewise(l: f64, mu0: f64, nu: f64, n: usize) -> Result<FiniteSumObjective> {
    check_pos("L", l)?;
    check_pos("mu0", mu0)?;
    check_nonneg("nu", nu)?;
    check_even(n)?;
    if mu0 > l {
        return param("mu0 must not exceed L");
    }
    FiniteSumObjective::new(
        "f2_piecewise",
        signed_family(n, l, mu0, nu),
        Constants { l, mu: mu0, tau: 0.0, nu },
        vec![0.0],
        0.0,
        FunctionClass::StronglyConvex,
    )
}

pub fn make_f3_quadratic_pm(l: f64, nu: f64, n: usize) -> Result<FiniteSumObjective> {
    check_pos("L", l)?;
    check_nonneg("nu", nu)?;
    check_even(n)?;
    FiniteSumObjective::new(
        "f3_quadratic_pm",
        signed_family(n, l, l, nu),
        Constants { l, mu: l, tau: 0.0, nu },
        vec![0.0],
        0.0,
        FunctionClass::StronglyConvex,
    )
}

/// Three-block objective `F1(x) + F2(y) + F3(z)` with `nu / sqrt(3)` per block.
/// `d0` is the starting `x` coordinate; the usual choice is `nu / mu`.
pub fn make_thm1_aggregate_d0(l: f64, mu: f64, nu: f64, n: usize, k: usize, d0: f64) -> Result<FiniteSumObjective> {
    check_pos("L", l)?;
    check_pos("mu", mu)?;
    check_pos("nu", nu)?;
    check_even(n)?;
    if k == 0 {
        return param("K must be positive");
    }
    if l / mu < C1 {
        return Err(Error::Regime(format!("kappa = {} is below {C1}", l / mu)));
    }
    let nu_b = nu / 3f64.sqrt();
    let f1 = ComponentFn::scalar(mu, mu, 0.0);
    let comps = (0..n)
        .map(|i| {
            let s = if i < n / 2 { 1.0 } else { -1.0 };
            f1.concat(&ComponentFn::scalar(l, l / C1, s * nu_b)).concat(&ComponentFn::scalar(l, l, s * nu_b))
        })
        .collect();
    let y0 = INIT_FACTOR * nu / (mu * (n as f64).sqrt() * k as f64);
    FiniteSumObjective::new(
        "thm1_aggregate",
        comps,
        Constants { l, mu, tau: 0.0, nu },
        vec![0.0; 3],
        0.0,
        FunctionClass::StronglyConvex,
    )?
    .with_init(vec![d0, y0, 0.0])
}

pub fn make_thm1_aggregate(l: f64, mu: f64, nu: f64, n: usize, k: usize) -> Result<FiniteSumObjective> {
    make_thm1_aggregate_d0(l, mu, nu, n, k, nu / mu)
}

pub fn make_thm7_coupled(l: f64, mu: f64, nu: f64, n: usize) -> Result<FiniteSumObjective> {
    check_pos("L", l)?;
    check_pos("mu", mu)?;
    check_nonneg("nu", nu)?;
    check_even(n)?;
    if mu > l / 2.0 {
        return param("mu must not exceed L/2");
    }
    let plus = ComponentFn::scalar(l, l / 2.0, nu);
    let minus = ComponentFn::scalar(l, l / 2.0, -nu);
    let comps = (0..n).map(|i| if i < n / 2 { plus.concat(&minus) } else { minus.concat(&plus) }).collect();
    FiniteSumObjective::new(
        "thm7_coupled",
        comps,
        Constants { l, mu, tau: 0.0, nu: 2f64.sqrt() * nu },
        vec![0.0; 2],
        0.0,
        FunctionClass::StronglyConvex,
    )?
    .with_init(vec![nu / (2.0 * l), 0.0])
}

/// Half `g1(y) = L y^2/2 - nu y`, half `g2(y) = -(L/2)(1 - 2mu/L) y^2 + nu y`.
pub fn make_thm9_nonconvex_pair(l: f64, mu: f64, nu: f64, n: usize) -> Result<FiniteSumObjective> {
    check_pos("L", l)?;
    check_pos("mu", mu)?;
    check_nonneg("nu", nu)?;
    check_even(n)?;
    if l / mu <= n as f64 {
        return Err(Error::Regime(format!("L/mu = {} must exceed n = {n}", l / mu)));
    }
    let a2 = -l * (1.0 - 2.0 * mu / l);
    let comps = (0..n)
        .map(|i| if i < n / 2 { ComponentFn::scalar(l, l, -nu) } else { ComponentFn::scalar(a2, a2, nu) })
        .collect();
    FiniteSumObjective::new(
        "thm9_nonconvex_pair",
        comps,
        Constants { l, mu, tau: l / mu, nu },
        vec![0.0],
        0.0,
        FunctionClass::Pl,
    )?
    .with_init(vec![nu / (60.0 * l)])
}

/// One heavy component `L z^2/2 - nu z`; the rest `-L z^2/(4(n-1)) + nu z/(n-1)`.
pub fn make_thm9_single_heavy(l: f64, nu: f64, n: usize) -> Result<FiniteSumObjective> {
    check_pos("L", l)?;
    check_nonneg("nu", nu)?;
    if n < 2 {
        return param("n must be at least 2");
    }
    let m = (n - 1) as f64;
    let light = ComponentFn::scalar(-l / (2.0 * m), -l / (2.0 * m), nu / m);
    let mut comps = vec![ComponentFn::scalar(l, l, -nu)];
    comps.extend(std::iter::repeat(light).take(n - 1));
    let nf = n as f64;
    FiniteSumObjective::new(
        "thm9_single_heavy",
        comps,
        Constants { l, mu: l / (2.0 * nf), tau: 2.0 * nf, nu },
        vec![0.0],
        0.0,
        FunctionClass::Pl,
    )?
    .with_init(vec![3.0 * nu / (8.0 * nf * l)])
}

/// Identical components `L w^2`, started at `w = scale`.
pub fn make_diverging_quadratic(l: f64, n: usize, scale: f64) -> Result<FiniteSumObjective> {
    check_pos("L", l)?;
    if n == 0 {
        return param("n must be positive");
    }
    if !scale.is_finite() {
        return param("scale must be finite");
    }
    FiniteSumObjective::new(
        "diverging_quadratic",
        vec![ComponentFn::scalar(2.0 * l, 2.0 * l, 0.0); n],
        Constants { l: 2.0 * l, mu: 2.0 * l, tau: 0.0, nu: 0.0 },
        vec![0.0],
        0.0,
        FunctionClass::StronglyConvex,
    )?
    .with_init(vec![scale])
}

/// `f_i(x) = sum_j a_j (x_j - c_ij)^2 / 2` with a shared diagonal `a` spread
/// geometrically over `[mu, L]` and random centred shifts, scaled so that
/// `max_i |A c_i| = nu`. Starts at the all-ones point.
pub fn make_shifted_quadratic(l: f64, mu: f64, nu: f64, n: usize, dim: usize, seed: u64) -> Result<FiniteSumObjective> {
    check_pos("L", l)?;
    check_pos("mu", mu)?;
    check_pos("nu", nu)?;
    if mu > l {
        return param("mu must not exceed L");
    }
    if n < 2 || dim == 0 {
        return param("need n >= 2 and dim >= 1");
    }
    let a: Vec<f64> =
        if dim == 1 { vec![mu] } else { (0..dim).map(|j| mu * (l / mu).powf(j as f64 / (dim - 1) as f64)).collect() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let mean = column_mean(&c);
    c.iter_mut().for_each(|ci| ci.iter_mut().zip(&mean).for_each(|(v, m)| *v -= m));
    let spread =
        c.iter().map(|ci| norm(&ci.iter().zip(&a).map(|(v, aj)| v * aj).collect::<Vec<_>>())).fold(0.0, f64::max);
    if spread == 0.0 {
        return param("degenerate shifts");
    }
    c.iter_mut().for_each(|ci| ci.iter_mut().for_each(|v| *v *= nu / spread));
    let comps = c
        .iter()
        .map(|ci| {
            let lin = ci.iter().zip(&a).map(|(v, aj)| -aj * v).collect();
            let offset = ci.iter().zip(&a).map(|(v, aj)| 0.5 * aj * v * v).sum();
            ComponentFn::new(a.clone(), a.clone(), lin, offset)
        })
        .collect::<Result<Vec<_>>>()?;
    let x_star = column_mean(&c);
    let mut obj = FiniteSumObjective::new(
        "shifted_quadratic",
        comps,
        Constants { l, mu, tau: 0.0, nu },
        x_star.clone(),
        0.0,
        FunctionClass::StronglyConvex,
    )?;
    obj.f_star = obj.value(&x_star);
    obj.with_init(vec![1.0; dim])
}

fn column_mean(rows: &[Vec<f64>]) -> Vec<f64> {
    let mut m = vec![0.0; rows[0].len()];
    for r in rows {
        m.iter_mut().zip(r).for_each(|(a, b)| *a += b);
    }
    m.iter_mut().for_each(|a| *a /= rows.len() as f64);
    m
}

/// Turns an `m`-component construction into an `m + 1`-component one by
/// appending a zero component. The average becomes `m/(m+1)` times the old
/// one, and the declared constants are adjusted to match.
pub fn pad_to_even(obj: &FiniteSumObjective) -> FiniteSumObjective {
    let m = obj.n() as f64;
    let n = m + 1.0;
    let mut comps = obj.components.clone();
    comps.push(ComponentFn::zero(obj.dim()));
    let c = obj.constants;
    FiniteSumObjective {
        name: format!("{}+zero", obj.name),
        components: comps,
        constants: Constants { l: c.l, mu: c.mu * m / n, tau: ((c.tau + 1.0 / n) * n / m).max(1.0), nu: c.nu },
        x_star: obj.x_star.clone(),
        f_star: obj.f_star * m / n,
        class: obj.class,
        init: obj.init.clone(),
    }
}

/// Keys accepted by [`from_key`].
pub const ZOO_KEYS: &[&str] = &[
    "f1_quadratic",
    "f2_piecewise",
    "f3_quadratic_pm",
    "thm1_aggregate",
    "thm7_coupled",
    "thm9_nonconvex_pair",
    "thm9_single_heavy",
    "diverging_quadratic",
    "shifted_quadratic",
];

fn get_f64(p: &Value, key: &str, default: Option<f64>) -> Result<f64> {
    match p.get(key) {
        Some(v) => v.as_f64().ok_or_else(|| Error::Parameter(format!("`{key}` must be a number"))),
        None => default.ok_or_else(|| Error::Parameter(format!("missing parameter `{key}`"))),
    }
}

fn get_usize(p: &Value, key: &str, default: Option<usize>) -> Result<usize> {
    match p.get(key) {
        Some(v) => v
            .as_u64()
            .map(|u| u as usize)
            .ok_or_else(|| Error::Parameter(format!("`{key}` must be a nonnegative integer"))),
        None => default.ok_or_else(|| Error::Parameter(format!("missing parameter `{key}`"))),
    }
}

/// Builds a zoo objective from its key and a JSON parameter object.
///
/// Parameter names follow the constructors (`L`, `mu`, `mu0`, `nu`, `n`, `K`,
/// `dim`, `scale`, `seed`, `D0`). Two optional keys apply to every entry:
/// `x0` (number or array) overrides the starting point and `pad: true`
/// appends a zero component.
pub fn from_key(key: &str, p: &Value) -> Result<FiniteSumObjective> {
    let l = || get_f64(p, "L", Some(1.0));
    let nu = || get_f64(p, "nu", Some(1.0));
    let n = || get_usize(p, "n", None);
    let mut obj = match key {
        "f1_quadratic" => make_f1_quadratic(get_f64(p, "mu", None)?, get_usize(p, "dim", Some(1))?, n()?)?,
        "f2_piecewise" => {
            let l = l()?;
            make_f2_piecewise(l, get_f64(p, "mu0", Some(l / C1))?, nu()?, n()?)?
        }
        "f3_quadratic_pm" => make_f3_quadratic_pm(l()?, nu()?, n()?)?,
        "thm1_aggregate" => {
            let (l, mu, nu) = (l()?, get_f64(p, "mu", None)?, nu()?);
            let d0 = get_f64(p, "D0", Some(nu / mu))?;
            make_thm1_aggregate_d0(l, mu, nu, n()?, get_usize(p, "K", None)?, d0)?
        }
        "thm7_coupled" => make_thm7_coupled(l()?, get_f64(p, "mu", None)?, nu()?, n()?)?,
        "thm9_nonconvex_pair" => make_thm9_nonconvex_pair(l()?, get_f64(p, "mu", None)?, nu()?, n()?)?,
        "thm9_single_heavy" => make_thm9_single_heavy(l()?, nu()?, n()?)?,
        "diverging_quadratic" => make_diverging_quadratic(l()?, n()?, get_f64(p, "scale", Some(1.0))?)?,
        "shifted_quadratic" => make_shifted_quadratic(
            l()?,
            get_f64(p, "mu", None)?,
            nu()?,
            n()?,
            get_usize(p, "dim", Some(8))?,
            get_usize(p, "seed", Some(0))? as u64,
        )?,
        other => return param(format!("unknown objective `{other}`; known: {}", ZOO_KEYS.join(", "))),
    };
    if p.get("pad").and_then(Value::as_bool).unwrap_or(false) {
        obj = pad_to_even(&obj);
    }
    match p.get("x0") {
        None => Ok(obj),
        Some(Value::Number(v)) => {
            let v = v.as_f64().unwrap_or(0.0);
            let d = obj.dim();
            obj.with_init(vec![v; d])
        }
        Some(Value::Array(vs)) => {
            let x0 = vs
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| Error::Parameter("x0 entries must be numbers".into())))
                .collect::<Result<Vec<_>>>()?;
            obj.with_init(x0)
        }
        Some(_) => param("x0 must be a number or an array"),
    }
}
