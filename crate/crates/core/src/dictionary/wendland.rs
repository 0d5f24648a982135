//! Wendland kernels: order 0 against uniform intervals, orders 0 and 2
//! against 1-d Gaussians.

use super::{gauss_hermite_mean, Embedding, Provenance};
use crate::error::{Error, Result};
use crate::specfun::erf;

const SQRT_PI: f64 = 1.772_453_850_905_516;
/// Beyond `ℓ + 40σ` from the mean the Gaussian mass under the kernel's
/// support is below the smallest double.
const CUTOFF_SIGMAS: f64 = 40.0;

/// `∫₀ᵗ (1 - |s|/ℓ)₊ ds`, odd in `t`.
fn wendland0_antiderivative(l: f64, t: f64) -> f64 {
    let u = t.abs().min(l);
    t.signum() * (u - u * u / (2.0 * l))
}

/// `K_P(x)` for the order-0 kernel against the uniform measure on `[a, b]`.
///
/// Inside `[a, b]` the four cases are selected with `b ≥ x + ℓ` and
/// `a + ℓ < x`. Outside, the embedding is `(F(x - a) - F(x - b))/r` with `F`
/// the kernel's antiderivative.
pub fn wendland0_uniform_kp(l: f64, a: f64, b: f64, x: f64) -> f64 {
    let r = b - a;
    if !(x >= a && x <= b) {
        return (wendland0_antiderivative(l, x - a) - wendland0_antiderivative(l, x - b)) / r;
    }
    let c = 1.0 / (2.0 * r * l);
    match (b >= x + l, a + l < x) {
        (true, true) => l / r,
        (true, false) => c * (2.0 * x * (a + l) + l * l - a * a - 2.0 * a * l - x * x),
        (false, true) => c * (2.0 * b * (l + x) + l * l - b * b - 2.0 * l * x - x * x),
        (false, false) => {
            c * (2.0 * (b * l + b * x + a * x) - a * a - b * b - 2.0 * (a * l + x * x))
        }
    }
}

/// `K_PP` for the order-0 kernel against the uniform measure on an interval of length `r`.
pub fn wendland0_uniform_kpp(l: f64, r: f64) -> f64 {
    if r == 2.0 * l {
        5.0 / 12.0
    } else if l < r {
        l * (3.0 * r - l) / (3.0 * r * r)
    } else {
        1.0 - r / (3.0 * l)
    }
}

pub fn wendland0_uniform(lengthscale: f64, a: f64, b: f64) -> Result<Embedding> {
    if !(lengthscale.is_finite() && lengthscale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lengthscale must be positive, got {lengthscale}"
        )));
    }
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::InvalidParameter(format!(
            "need a < b, got [{a}, {b}]"
        )));
    }
    let kpp = wendland0_uniform_kpp(lengthscale, b - a);
    let kp = move |x: &[f64]| Ok(wendland0_uniform_kp(lengthscale, a, b, x[0]));
    Ok(Embedding::closed_form("wendland/uniform_box", 1, kp, kpp))
}

/// `K_P(x)` for Wendland order 0 or 2 against `N(μ, σ²)`.
pub fn wendland_gauss_kp_value(order: u32, l: f64, mu: f64, sigma: f64, x: f64) -> f64 {
    let x = x - mu;
    if x.abs() > l + CUTOFF_SIGMAS * sigma {
        return 0.0;
    }
    let s = std::f64::consts::SQRT_2 * sigma;
    let phi = |t: f64| (-t * t / (2.0 * sigma * sigma)).exp();
    let (em, ep, e0) = (erf((l - x) / s), erf((l + x) / s), erf(x / s));
    if order == 0 {
        return ((l - x) * em + (l + x) * ep - 2.0 * x * e0
            + s / SQRT_PI * (phi(l - x) + phi(l + x) - 2.0 * phi(x)))
            / (2.0 * l);
    }
    let (s2, x2) = (sigma * sigma, x * x);
    let (pm, pp, p0) = (phi(x - l), phi(x + l), phi(x));
    let gauss_part = s / SQRT_PI
        * ((pm + pp) * (l * l * l - l * (7.0 * s2 + 5.0 * x2)) + 16.0 * l * (2.0 * s2 + x2) * p0
            - (pp - pm) * (l * l * x + 3.0 * x * (5.0 * s2 + x2)));
    let common =
        l.powi(4) - 6.0 * l * l * (s2 + x2) - 3.0 * (3.0 * s2 * s2 + 6.0 * s2 * x2 + x2 * x2);
    let odd = 8.0 * l * (3.0 * s2 * x + x2 * x);
    let erf_part = (common + odd) * em + (common - odd) * ep + 16.0 * l * x * (3.0 * s2 + x2) * e0;
    (gauss_part + erf_part) / (2.0 * l.powi(4))
}

/// Wendland order 0 or 2 against `N(μ, σ²)`.
///
/// Inputs are translated by `μ`, which is exact for a stationary kernel.
/// `K_PP` is the Gauss–Hermite integral of `K_P` (numeric fallback).
pub fn wendland_gauss_kp(order: u32, lengthscale: f64, mu: f64, sigma: f64) -> Result<Embedding> {
    if order != 0 && order != 2 {
        return Err(Error::Unsupported(format!(
            "Wendland order {order} against a Gaussian; use 0 or 2"
        )));
    }
    if !(lengthscale.is_finite()
        && lengthscale > 0.0
        && sigma.is_finite()
        && sigma > 0.0
        && mu.is_finite())
    {
        return Err(Error::InvalidParameter(format!(
            "need positive lengthscale and standard deviation, got ℓ = {lengthscale}, σ = {sigma}"
        )));
    }
    let f = move |x: f64| wendland_gauss_kp_value(order, lengthscale, mu, sigma, x);
    let kpp = gauss_hermite_mean(&f, mu, sigma);
    Ok(Embedding::new(
        "wendland/gaussian",
        1,
        move |x: &[f64]| Ok(f(x[0])),
        kpp,
        Provenance::ClosedForm,
        Provenance::NumericFallback,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kpp_at_twice_lengthscale() {
        assert_eq!(wendland0_uniform(0.5, 0.0, 1.0).unwrap().kpp, 5.0 / 12.0);
        assert!((wendland0_uniform_kpp(0.5 + 1e-12, 1.0) - 5.0 / 12.0).abs() < 1e-11);
        assert!((wendland0_uniform_kpp(0.5 - 1e-12, 1.0) - 5.0 / 12.0).abs() < 1e-11);
    }

    #[test]
    fn kp_is_continuous_across_cases() {
        for (l, a, b) in [(0.4, 0.0, 1.0), (2.0, -1.0, 1.0), (1.0, 0.0, 3.0)] {
            for edge in [a + l, b - l, a, b] {
                let lo = wendland0_uniform_kp(l, a, b, edge - 1e-9);
                let hi = wendland0_uniform_kp(l, a, b, edge + 1e-9);
                assert!((lo - hi).abs() < 1e-7, "l={l} edge={edge}");
            }
        }
    }

    #[test]
    fn kp_against_trapezoid() {
        // 10⁵-panel trapezoid rule of ∫₀³ (1 - |1.5 - y|)₊ dy / 3; the
        // breakpoints fall on panel edges so the rule is exact up to rounding.
        let n = 100_000;
        let h = 3.0 / n as f64;
        let f = |y: f64| (1.0 - (1.5 - y).abs()).max(0.0);
        let mut s = 0.5 * (f(0.0) + f(3.0));
        for i in 1..n {
            s += f(i as f64 * h);
        }
        let want = s * h / 3.0;
        assert!((wendland0_uniform_kp(1.0, 0.0, 3.0, 1.5) - want).abs() < 1e-8);
    }

    #[test]
    fn gaussian_far_tail_is_zero() {
        for order in [0, 2] {
            assert_eq!(wendland_gauss_kp_value(order, 1.0, 0.0, 1.0, 50.0), 0.0);
            assert!(wendland_gauss_kp_value(order, 1.0, 0.0, 1.0, 12.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_point_mass_limit() {
        let v = wendland_gauss_kp_value(2, 2.0, 1.0, 1e-4, 1.7);
        let t: f64 = 0.35;
        let want = (1.0 - t).powi(3) * (3.0 * t + 1.0);
        assert!((v - want).abs() < 1e-6);
    }
}
