//! Half-integer Matérn kernels against uniform intervals and 1-d Gaussians.

use super::{gauss_hermite_mean, Embedding, Provenance};
use crate::error::{Error, Result};
use crate::kernels::matern::uniform_coefficients;
use crate::specfun::{erfcx, factorial, log_normal_cdf, lower_incomplete_gamma_int, normal_cdf};

fn check_interval(lengthscale: f64, a: f64, b: f64) -> Result<()> {
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
    Ok(())
}

fn check_order(n: u32, max: u32) -> Result<()> {
    if n > max {
        return Err(Error::Unsupported(format!(
            "Matérn order n = {n} (nu = {}.5) is not available here",
            n
        )));
    }
    Ok(())
}

/// Quantities shared by the uniform-interval formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct MaternUniformCoefficients {
    pub n: u32,
    /// `α_n = ℓ / √(2n+1)`.
    pub alpha: f64,
    /// `ρ_n = r / α_n`.
    pub rho: f64,
    /// `c_{n,m}`, `m = 0..=n`.
    pub c: Vec<f64>,
    /// `n! / (2n)!`.
    pub norm: f64,
}

impl MaternUniformCoefficients {
    pub fn new(n: u32, lengthscale: f64, r: f64) -> Self {
        let alpha = lengthscale / (2.0 * n as f64 + 1.0).sqrt();
        MaternUniformCoefficients {
            n,
            alpha,
            rho: r / alpha,
            c: uniform_coefficients(n),
            norm: factorial(n) / factorial(2 * n),
        }
    }

    /// `d_n(x, y) = (x - y) / α_n`.
    pub fn d(&self, x: f64, y: f64) -> f64 {
        (x - y) / self.alpha
    }

    /// `Q_n(z) = e^{-z} Σ_m c_{n,m} z^m`.
    pub fn q(&self, z: f64) -> f64 {
        (-z).exp() * self.c.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }

    /// `∫₀ᵗ K(s) ds`, extended to negative `t` as an odd function.
    fn antiderivative(&self, t: f64) -> f64 {
        let z = t.abs() / self.alpha;
        t.signum() * self.alpha * self.norm * (self.c[0] - self.q(z))
    }

    /// `ρ_n c_{n,0} - Σ_m c_{n,m} γ_{m+1}`.
    fn kpp_bracket(&self) -> Result<f64> {
        let rho = self.rho;
        // ρ - γ₁(ρ) = ρ - 1 + e^{-ρ}, summed as a series when it cancels.
        let rho_minus_g1 = if rho < 1.0 {
            let mut term = -rho;
            let mut sum = 0.0;
            for k in 2..40 {
                term *= -rho / k as f64;
                sum += term;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            sum
        } else {
            rho - 1.0 + (-rho).exp()
        };
        let mut acc = self.c[0] * rho_minus_g1;
        for m in 1..=self.n {
            acc -= self.c[m as usize] * lower_incomplete_gamma_int(m, rho)?;
        }
        Ok(acc)
    }
}

/// Matérn `ν = n + 1/2` against the uniform measure on `[a, b]`, from the
/// general formula in `Q_n` and the lower incomplete gamma function.
///
/// `K_P` is valid on the whole line.
pub fn matern_uniform_general(n: u32, lengthscale: f64, a: f64, b: f64) -> Result<Embedding> {
    check_order(n, 3)?;
    check_interval(lengthscale, a, b)?;
    let r = b - a;
    let co = MaternUniformCoefficients::new(n, lengthscale, r);
    let kpp = 2.0 / (co.rho * co.rho) * co.norm * co.kpp_bracket()?;
    let kp = move |x: &[f64]| Ok((co.antiderivative(x[0] - a) - co.antiderivative(x[0] - b)) / r);
    Ok(Embedding::closed_form("matern/uniform_box", 1, kp, kpp))
}

/// Explicit `K_P` for `n = 0..=3`, valid for `x ∈ [a, b]`.
fn special_kp(co: &MaternUniformCoefficients, a: f64, b: f64, x: f64) -> f64 {
    let (u, v) = (co.d(x, b), co.d(a, x));
    let rho = co.rho;
    match co.n {
        0 => (2.0 - u.exp() - v.exp()) / rho,
        1 => (4.0 - u.exp() * (2.0 - u) - v.exp() * (2.0 - v)) / rho,
        2 => {
            let p = |d: f64| d.exp() * (8.0 - 5.0 * d + d * d);
            (16.0 - p(u) - p(v)) / (3.0 * rho)
        }
        _ => {
            let p = |d: f64| d.exp() * (48.0 - 33.0 * d + 9.0 * d * d - d * d * d);
            (96.0 - p(u) - p(v)) / (15.0 * rho)
        }
    }
}

fn special_kpp(n: u32, rho: f64) -> f64 {
    let e = (-rho).exp();
    let r2 = rho * rho;
    match n {
        0 => 2.0 / r2 * (rho - 1.0 + e),
        1 => 2.0 / r2 * (2.0 * rho - 3.0 + e * (rho + 3.0)),
        2 => 2.0 / (3.0 * r2) * (8.0 * rho - 15.0 + e * (r2 + 7.0 * rho + 15.0)),
        _ => {
            2.0 / (15.0 * r2)
                * (3.0 * (16.0 * rho - 35.0) + e * (r2 * rho + 12.0 * r2 + 57.0 * rho + 105.0))
        }
    }
}

/// The same embedding from the explicit per-order formulas.
///
/// These lose accuracy when `(b - a)/ℓ` is small; prefer
/// [`matern_uniform_general`]. `K_P` is only defined on `[a, b]`.
pub fn matern_uniform_special(n: u32, lengthscale: f64, a: f64, b: f64) -> Result<Embedding> {
    check_order(n, 3)?;
    check_interval(lengthscale, a, b)?;
    let co = MaternUniformCoefficients::new(n, lengthscale, b - a);
    let kpp = special_kpp(n, co.rho);
    let kp = move |x: &[f64]| {
        if !(x[0] >= a && x[0] <= b) {
            return Err(Error::OutsideDomain(format!(
                "{} is outside [{a}, {b}]",
                x[0]
            )));
        }
        Ok(special_kp(&co, a, b, x[0]))
    };
    Ok(Embedding::closed_form("matern/uniform_box", 1, kp, kpp))
}

/// The shifted means `μ₁, μ₂` (`ν = 3/2`) and `μ₃, μ₄` (`ν = 5/2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaternGaussianShifts {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    /// `s = √2 σ`.
    pub s: f64,
}

impl MaternGaussianShifts {
    pub fn new(lengthscale: f64, mu: f64, sigma: f64) -> Self {
        let (r3, r5) = (3f64.sqrt(), 5f64.sqrt());
        let v = sigma * sigma / lengthscale;
        MaternGaussianShifts {
            mu1: mu - r3 * v,
            mu2: mu + r3 * v,
            mu3: mu - r5 * v,
            mu4: mu + r5 * v,
            s: std::f64::consts::SQRT_2 * sigma,
        }
    }
}

/// `e^A [P Φ(z) + c φ(z)]`, in the log domain when `e^A` or `Φ(z)` leave
/// the comfortable range.
fn stable_term(a: f64, z: f64, p: f64, c: f64) -> f64 {
    const INV_SQRT_TAU: f64 = 0.398_942_280_401_432_7;
    if a.abs() <= 40.0 && z >= -8.0 {
        return a.exp() * (p * normal_cdf(z) + c * INV_SQRT_TAU * (-0.5 * z * z).exp());
    }
    if z < 0.0 {
        // Φ(z) = φ(z)·M(-z) with the Mills ratio M(t) = √(π/2)·erfcx(t/√2).
        let mills = (std::f64::consts::PI / 2.0).sqrt() * erfcx(-z / std::f64::consts::SQRT_2);
        INV_SQRT_TAU * (a - 0.5 * z * z).exp() * (p * mills + c)
    } else {
        p * (a + log_normal_cdf(z)).exp() + c * INV_SQRT_TAU * (a - 0.5 * z * z).exp()
    }
}

/// One of the two symmetric halves, `v = μ - x` (left) or `v = x - μ` (right).
fn matern_gauss_side(n: u32, lengthscale: f64, sigma: f64, v: f64) -> f64 {
    let l = lengthscale;
    let s = (2.0 * n as f64 + 1.0).sqrt();
    let a = (s * s * sigma * sigma - 2.0 * s * l * v) / (2.0 * l * l);
    let u = v - s * sigma * sigma / l;
    let z = u / sigma;
    let (p, c) = match n {
        0 => (1.0, 0.0),
        1 => (1.0 + s * u / l, s * sigma / l),
        _ => (
            1.0 + s * u / l + 5.0 * (u * u + sigma * sigma) / (3.0 * l * l),
            (s / l + 5.0 * u / (3.0 * l * l)) * sigma,
        ),
    };
    stable_term(a, z, p, c)
}

/// `K_P(x)` for Matérn `ν = n + 1/2`, `n ≤ 2`, against `N(μ, σ²)`.
pub fn matern_gauss_kp_value(n: u32, lengthscale: f64, mu: f64, sigma: f64, x: f64) -> f64 {
    matern_gauss_side(n, lengthscale, sigma, mu - x)
        + matern_gauss_side(n, lengthscale, sigma, x - mu)
}

/// Matérn `ν ∈ {1/2, 3/2, 5/2}` against `N(μ, σ²)`.
///
/// `K_P` is closed form. `K_PP` has no known closed form and is the
/// Gauss–Hermite integral of `K_P`, labelled as a numeric fallback.
pub fn matern_gauss_kp(n: u32, lengthscale: f64, mu: f64, sigma: f64) -> Result<Embedding> {
    check_order(n, 2)?;
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
    let f = move |x: f64| matern_gauss_kp_value(n, lengthscale, mu, sigma, x);
    let kpp = gauss_hermite_mean(&f, mu, sigma);
    Ok(Embedding::new(
        "matern/gaussian",
        1,
        move |x: &[f64]| Ok(f(x[0])),
        kpp,
        Provenance::ClosedForm,
        Provenance::NumericFallback,
    ))
}
