use crate::error::{Error, Result};

const INV_E: f64 = 0.367_879_441_171_442_33;

/// Principal branch of the Lambert W function: the `w >= -1` solving
/// `w * exp(w) = x`.
///
/// Halley iteration started from `ln(1 + x)`, or from the branch-point series
/// in `sqrt(2(e x + 1))` close to `-1/e`.
///
/// # Errors
///
/// [`Error::Domain`] for `x < -1/e` or NaN.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < -INV_E - 1e-16 {
        return Err(Error::Domain(format!("lambert_w0 undefined at {x}")));
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let q = 2.0 * (std::f64::consts::E * x + 1.0);
    if q <= 0.0 {
        return Ok(-1.0);
    }
    let mut w = if x < -0.3 {
        let p = q.sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        x.ln_1p()
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}
