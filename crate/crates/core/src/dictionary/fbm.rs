//! Fractional Brownian motion against a uniform interval.

use super::Embedding;
use crate::error::{Error, Result};

/// `K_P` and `K_PP` for Hurst index `H` on `[a, b]`, `0 ≤ a < b`, with `h = 2H + 1`.
pub fn fbm_uniform(hurst: f64, a: f64, b: f64) -> Result<Embedding> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Hurst index must be in (0, 1), got {hurst}"
        )));
    }
    if !(a.is_finite() && b.is_finite() && a >= 0.0 && b > a) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= a < b, got [{a}, {b}]"
        )));
    }
    let h = 2.0 * hurst + 1.0;
    let r = b - a;
    let span = b.powf(h) - a.powf(h);
    let kpp = ((h + 1.0) * span - r.powf(h)) / (h * (h + 1.0) * r);
    let kp = move |x: &[f64]| {
        let x = x[0];
        if !(x >= a && x <= b) {
            return Err(Error::OutsideDomain(format!("{x} is outside [{a}, {b}]")));
        }
        Ok((span - (b - x).powf(h) - (x - a).powf(h)) / (2.0 * h * r) + 0.5 * x.powf(h - 1.0))
    };
    Ok(Embedding::closed_form("fbm/uniform_box", 1, kp, kpp))
}
