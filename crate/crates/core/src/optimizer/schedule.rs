//! Constant step sizes prescribed by the upper-bound results.

use log::warn;

use super::lambert::lambert_w0;
use crate::error::{param, Result};

fn positive(args: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in args {
        if !(v > 0.0 && v.is_finite()) {
            return param(format!("{name} must be positive and finite, got {v}"));
        }
    }
    Ok(())
}

/// `max{1, log(mu^3 n D^2 K^2 / (L nu^2))}`; warns when the floor engages.
fn clamped_log(l: f64, mu: f64, nu: f64, d: f64, n: usize, k: usize, who: &str) -> f64 {
    let (n, k) = (n as f64, k as f64);
    let lg = (mu.powi(3) * n * d * d * k * k / (l * nu * nu)).ln();
    if lg < 1.0 {
        warn!("{who}: log argument below e (log = {lg:.3}); using 1, K is below the intended regime");
    }
    lg.max(1.0)
}

/// Random-reshuffling step size for strongly convex objectives,
/// `min{2/(Ln), log(mu^3 n D^2 K^2 / (L nu^2)) / (mu n K)}`, with the log
/// floored at one.
pub fn stepsize_mishchenko_strcvx(l: f64, mu: f64, nu: f64, d: f64, n: usize, k: usize) -> Result<f64> {
    positive(&[("L", l), ("mu", mu), ("nu", nu), ("D", d), ("n", n as f64), ("K", k as f64)])?;
    let lg = clamped_log(l, mu, nu, d, n, k, "stepsize_mishchenko_strcvx");
    let (nf, kf) = (n as f64, k as f64);
    Ok((2.0 / (l * nf)).min(lg / (mu * nf * kf)))
}

/// Tail-average step size `min{1/(sqrt(2) L n), 9 max{1, log(.)} / (mu n K)}`.
pub fn stepsize_tail_average(l: f64, mu: f64, nu: f64, d: f64, n: usize, k: usize) -> Result<f64> {
    positive(&[("L", l), ("mu", mu), ("nu", nu), ("D", d), ("n", n as f64), ("K", k as f64)])?;
    let lg = (mu.powi(3) * n as f64 * d * d * (k * k) as f64 / (l * nu * nu)).ln().max(1.0);
    let (nf, kf) = (n as f64, k as f64);
    Ok((1.0 / (std::f64::consts::SQRT_2 * l * nf)).min(9.0 * lg / (mu * nf * kf)))
}

/// The W₀ argument of [`stepsize_grab`].
pub fn grab_w_argument(f0_gap: f64, l: f64, mu: f64, nu: f64, h: f64, n: usize, k: usize) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    (f0_gap + nu * nu / l) * mu.powi(3) * nf * nf * kf * kf / (192.0 * h * h * l * l * nu * nu)
}

/// GraB step size `(2/(mu n K)) W0((F(x0) - F* + nu^2/L) mu^3 n^2 K^2 / (192 H^2 L^2 nu^2))`.
pub fn stepsize_grab(f0_gap: f64, l: f64, mu: f64, nu: f64, h: f64, n: usize, k: usize) -> Result<f64> {
    positive(&[("L", l), ("mu", mu), ("nu", nu), ("H", h), ("n", n as f64), ("K", k as f64)])?;
    if f0_gap.is_nan() || f0_gap < 0.0 {
        return param(format!("initial gap must be nonnegative, got {f0_gap}"));
    }
    let w = lambert_w0(grab_w_argument(f0_gap, l, mu, nu, h, n, k))?;
    Ok(2.0 * w / (mu * n as f64 * k as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mishchenko_branches() {
        assert_eq!(stepsize_mishchenko_strcvx(1.0, 1e-3, 1e-6, 1e6, 2, 1).unwrap(), 1.0);
        let eta = stepsize_mishchenko_strcvx(1.0, 0.01, 1.0, 1.0, 10, 100_000).unwrap();
        assert!(eta < 2.0 / 10.0);
        let lg = (1e-6 * 10.0 * 1e10f64).ln();
        assert!((eta - lg / (0.01 * 10.0 * 1e5)).abs() < 1e-15);
    }

    #[test]
    fn tail_floor_and_cap() {
        let (l, mu, nu, n) = (1.0, 0.1, 1.0, 4);
        // mu^3 n D^2 K^2 = 0.004 * 100 * 1 = 0.4 <= e L nu^2, so the floor engages.
        let eta = stepsize_tail_average(l, mu, nu, 1.0, n, 10).unwrap();
        assert!((eta - (1.0 / (2f64.sqrt() * 4.0)).min(9.0 / 4.0)).abs() < 1e-15);
        let big = stepsize_tail_average(l, mu, nu, 1.0, n, 1_000_000_000).unwrap();
        assert!(big < 1e-5);
    }

    #[test]
    fn grab_plug_through() {
        let (l, mu, nu, h, n, k) = (1.0, 0.5, 1.0, 1.0, 4, 8);
        // Choose the gap so that the W argument equals e.
        let unit = grab_w_argument(0.0, l, mu, nu, h, n, k) / (nu * nu / l);
        let gap = std::f64::consts::E / unit - nu * nu / l;
        let eta = stepsize_grab(gap, l, mu, nu, h, n, k).unwrap();
        assert!((eta - 2.0 / (mu * 4.0 * 8.0)).abs() < 1e-14);
        assert!(stepsize_grab(gap, l, mu, nu, 2.0 * h, n, k).unwrap() < eta);
    }
}
