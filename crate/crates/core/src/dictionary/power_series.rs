//! Power-series kernels `Σ_α c_α x^α y^α`.

use std::collections::BTreeMap;

use super::Embedding;
use crate::error::{check_dim, Error, Result};
use crate::specfun::double_factorial;

fn monomial(alpha: &[u32], x: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(x)
        .map(|(&a, v)| v.powi(a as i32))
        .product()
}

/// Terms `(α, c_α · m_α)` and `K_PP = Σ c_α m_α²` from per-term moments `m_α`.
fn from_moments(
    terms: &BTreeMap<Vec<u32>, f64>,
    moment: impl Fn(&[u32]) -> Result<f64>,
) -> Result<(Vec<(Vec<u32>, f64)>, f64)> {
    let mut weighted = Vec::with_capacity(terms.len());
    let mut kpp = 0.0;
    for (alpha, c) in terms {
        let m = moment(alpha)?;
        if m != 0.0 {
            weighted.push((alpha.clone(), c * m));
            kpp += c * m * m;
        }
    }
    Ok((weighted, kpp))
}

fn finish(pair: &str, dim: usize, weighted: Vec<(Vec<u32>, f64)>, kpp: f64) -> Embedding {
    let kp = move |x: &[f64]| Ok(weighted.iter().map(|(a, w)| w * monomial(a, x)).sum());
    Embedding::closed_form(pair, dim, kp, kpp)
}

fn term_dim(terms: &BTreeMap<Vec<u32>, f64>) -> Result<usize> {
    terms
        .keys()
        .next()
        .map(|a| a.len())
        .ok_or_else(|| Error::InvalidParameter("power series needs at least one term".into()))
}

/// Against the uniform measure on `Π [a_i, b_i]`: `m_α = Π (b^{α+1} - a^{α+1}) / ((α+1)(b-a))`.
pub fn powerseries_uniform(
    terms: &BTreeMap<Vec<u32>, f64>,
    a: &[f64],
    b: &[f64],
) -> Result<Embedding> {
    let d = term_dim(terms)?;
    check_dim(d, a.len())?;
    check_dim(d, b.len())?;
    let (weighted, kpp) = from_moments(terms, |alpha| {
        Ok(alpha
            .iter()
            .zip(a.iter().zip(b))
            .map(|(&k, (lo, hi))| {
                let p = k as i32 + 1;
                (hi.powi(p) - lo.powi(p)) / (p as f64 * (hi - lo))
            })
            .product())
    })?;
    Ok(finish("power_series/uniform_box", d, weighted, kpp))
}

/// Against the centred Gaussian with variances `σ_i²`:
/// `m_α = Π σ_i^{α_i} (α_i - 1)!!` for even `α`, zero otherwise.
pub fn powerseries_gauss(terms: &BTreeMap<Vec<u32>, f64>, variances: &[f64]) -> Result<Embedding> {
    let d = term_dim(terms)?;
    check_dim(d, variances.len())?;
    let (weighted, kpp) = from_moments(terms, |alpha| {
        let mut m = 1.0;
        for (&k, v) in alpha.iter().zip(variances) {
            if k % 2 == 1 {
                return Ok(0.0);
            }
            m *= v.sqrt().powi(k as i32) * double_factorial(k as i64 - 1)? as f64;
        }
        Ok(m)
    })?;
    Ok(finish("power_series/gaussian", d, weighted, kpp))
}
