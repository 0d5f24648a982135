//! Gaussian kernel against uniform boxes and Gaussian measures.

use nalgebra::{DMatrix, DVector};

use super::Embedding;
use crate::error::{check_dim, Error, Result};
use crate::kernels::{checked_cholesky, GaussianKernel};
use crate::measures::GaussianMeasure;
use crate::specfun::{erf, erfc};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// `erf(q) - erf(p)` for `p ≤ q`, using `erfc` on the tails to keep digits.
fn erf_diff(p: f64, q: f64) -> f64 {
    if p >= 0.0 {
        erfc(p) - erfc(q)
    } else if q <= 0.0 {
        erfc(-q) - erfc(-p)
    } else {
        erf(q) - erf(p)
    }
}

/// `√π · g(u) / u²` with `g(u) = (e^{-u²} - 1)/√π + u·erf(u)`; tends to 1 as `u → 0`.
fn kpp_factor(u: f64) -> f64 {
    if u < 0.5 {
        // g(u)·√π = Σ_{k≥1} (-1)^{k+1} u^{2k} / (k! (2k - 1)).
        let u2 = u * u;
        let mut pow = 1.0;
        let mut fact = 1.0;
        let mut sum = 0.0;
        for k in 1..30 {
            fact *= k as f64;
            let term = pow / (fact * (2 * k - 1) as f64);
            sum += if k % 2 == 1 { term } else { -term };
            pow *= u2;
            if term < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        ((-u * u).exp_m1() + SQRT_PI * u * erf(u)) / (u * u)
    }
}

/// Diagonal lengthscales `ℓ_i` against the uniform measure on `Π [a_i, b_i]`.
///
/// Both halves factorise over dimensions, and `K_PP` uses `ℓ_i` in every
/// factor.
pub fn gauss_uniform(lengthscales: &[f64], a: &[f64], b: &[f64]) -> Result<Embedding> {
    check_dim(lengthscales.len(), a.len())?;
    check_dim(a.len(), b.len())?;
    let kpp = lengthscales
        .iter()
        .zip(a.iter().zip(b))
        .map(|(l, (lo, hi))| kpp_factor((hi - lo) / (l * std::f64::consts::SQRT_2)))
        .product();
    let (ls, a, b) = (lengthscales.to_vec(), a.to_vec(), b.to_vec());
    let kp = move |x: &[f64]| {
        Ok((0..ls.len())
            .map(|i| {
                let s = ls[i] * std::f64::consts::SQRT_2;
                let r = b[i] - a[i];
                0.5 * SQRT_PI * s / r * erf_diff((a[i] - x[i]) / s, (b[i] - x[i]) / s)
            })
            .product())
    };
    Ok(Embedding::closed_form(
        "gaussian/uniform_box",
        lengthscales.len(),
        kp,
        kpp,
    ))
}

fn log_det_chol(
    m: &DMatrix<f64>,
    what: &str,
) -> Result<(f64, nalgebra::Cholesky<f64, nalgebra::Dyn>)> {
    let c = checked_cholesky(m, what)?;
    let l = c.l();
    Ok(((0..l.nrows()).map(|i| 2.0 * l[(i, i)].ln()).sum(), c))
}

/// Gaussian kernel with lengthscale matrix Λ against `N(μ, Σ)`.
pub fn gauss_gauss(kernel: &GaussianKernel, measure: &GaussianMeasure) -> Result<Embedding> {
    let d = kernel.dim();
    check_dim(d, measure.dim())?;
    let mu = measure.mean.clone();
    if let (Some(ls), Some(vars)) = (&kernel.lengthscales, &measure.variances) {
        let kpp = ls
            .iter()
            .zip(vars)
            .map(|(l, v)| (l * l / (l * l + 2.0 * v)).sqrt())
            .product();
        let (ls, vars) = (ls.clone(), vars.clone());
        let kp = move |x: &[f64]| {
            Ok((0..ls.len())
                .map(|i| {
                    let s = ls[i] * ls[i] + vars[i];
                    let t = x[i] - mu[i];
                    (ls[i] * ls[i] / s).sqrt() * (-0.5 * t * t / s).exp()
                })
                .product())
        };
        return Ok(Embedding::closed_form("gaussian/gaussian", d, kp, kpp));
    }
    let lambda = &kernel.lambda;
    let (ld_lambda, _) = log_det_chol(lambda, "lengthscale matrix")?;
    let (ld_sum, chol) = log_det_chol(&(lambda + &measure.cov), "Λ + Σ")?;
    let (ld_two, _) = log_det_chol(&(lambda + &measure.cov * 2.0), "Λ + 2Σ")?;
    let kpp = (0.5 * (ld_lambda - ld_two)).exp();
    let scale = (0.5 * (ld_lambda - ld_sum)).exp();
    let kp = move |x: &[f64]| {
        let dlt = DVector::from_iterator(x.len(), x.iter().zip(&mu).map(|(a, m)| a - m));
        Ok(scale * (-0.5 * dlt.dot(&chol.solve(&dlt))).exp())
    };
    Ok(Embedding::closed_form("gaussian/gaussian", d, kp, kpp))
}

/// `K_PQ = ∫∫ K dP dQ` for a Gaussian kernel and two Gaussian measures:
/// `√(det Λ / det M) · exp(-½ Δᵀ M⁻¹ Δ)` with `M = Λ + Σ_P + Σ_Q`, `Δ = μ_P - μ_Q`.
pub fn gauss_cross_kpq(
    kernel: &GaussianKernel,
    p: &GaussianMeasure,
    q: &GaussianMeasure,
) -> Result<f64> {
    let d = kernel.dim();
    check_dim(d, p.dim())?;
    check_dim(d, q.dim())?;
    let m = &kernel.lambda + &p.cov + &q.cov;
    let (ld_lambda, _) = log_det_chol(&kernel.lambda, "lengthscale matrix")?;
    let (ld_m, chol) = log_det_chol(&m, "Λ + Σ_P + Σ_Q")?;
    let dlt = DVector::from_iterator(d, p.mean.iter().zip(&q.mean).map(|(a, b)| a - b));
    let v = (0.5 * (ld_lambda - ld_m) - 0.5 * dlt.dot(&chol.solve(&dlt))).exp();
    if !v.is_finite() {
        return Err(Error::NumericalInconsistency(
            "non-finite cross embedding".into(),
        ));
    }
    Ok(v)
}
