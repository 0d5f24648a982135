//! New embeddings from known ones: kernel sums, mixtures, products,
//! changes of variable and matrix-valued kernels.

use nalgebra::DMatrix;

use crate::dictionary::{
    self, embed, gauss_cross_kpq, Embedding, MatrixEmbedding, Provenance, FALLBACK_SEED,
};
use crate::error::{Error, Result};
use crate::kernels::{check_psd, Kernel};
use crate::measures::Measure;
use crate::oracle::{self, Budget};
use crate::transform::Transform;

fn worst(parts: &[Embedding], f: impl Fn(&Embedding) -> Provenance) -> Provenance {
    parts.iter().map(f).max().unwrap_or(Provenance::ClosedForm)
}

/// Embedding of the kernel `Σ γ_j K_j` from the embeddings of the `K_j`.
pub fn sum_embed(parts: Vec<Embedding>, weights: &[f64], pair: &str) -> Embedding {
    let kpp = parts.iter().zip(weights).map(|(e, g)| g * e.kpp).sum();
    let se = parts
        .iter()
        .zip(weights)
        .map(|(e, g)| (g * e.kpp_stderr).powi(2))
        .sum::<f64>()
        .sqrt();
    let (kp_prov, kpp_prov) = (
        worst(&parts, |e| e.kp_provenance),
        worst(&parts, |e| e.kpp_provenance),
    );
    let dim = parts[0].dim;
    let weights = weights.to_vec();
    let kp = move |x: &[f64]| {
        let mut acc = 0.0;
        for (e, g) in parts.iter().zip(&weights) {
            acc += g * e.kp(x)?;
        }
        Ok(acc)
    };
    Embedding::new(pair, dim, kp, kpp, kp_prov, kpp_prov).with_stderr(se)
}

/// Embedding of a product kernel against a product measure, one factor per
/// coordinate block. The blocks must partition `0..d`.
pub fn product_embed(blocks: Vec<(Embedding, Vec<usize>)>, pair: &str) -> Result<Embedding> {
    if blocks.is_empty() {
        return Err(Error::InvalidParameter(
            "product needs at least one factor".into(),
        ));
    }
    let mut seen: Vec<usize> = blocks.iter().flat_map(|(_, d)| d.iter().copied()).collect();
    seen.sort_unstable();
    if seen.iter().enumerate().any(|(i, &d)| i != d) {
        return Err(Error::InvalidParameter(format!(
            "product blocks must partition the coordinates, got {seen:?}"
        )));
    }
    for (e, dims) in &blocks {
        crate::error::check_dim(e.dim, dims.len())?;
    }
    let kpp: f64 = blocks.iter().map(|(e, _)| e.kpp).product();
    let se = blocks
        .iter()
        .enumerate()
        .map(|(j, (e, _))| {
            let others: f64 = blocks
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, (o, _))| o.kpp)
                .product();
            (e.kpp_stderr * others).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    let embs: Vec<Embedding> = blocks.iter().map(|(e, _)| e.clone()).collect();
    let (kp_prov, kpp_prov) = (
        worst(&embs, |e| e.kp_provenance),
        worst(&embs, |e| e.kpp_provenance),
    );
    let dim = seen.len();
    let kp = move |x: &[f64]| {
        let mut acc = 1.0;
        for (e, dims) in &blocks {
            let sub: Vec<f64> = dims.iter().map(|&i| x[i]).collect();
            acc *= e.kp(&sub)?;
        }
        Ok(acc)
    };
    Ok(Embedding::new(pair, dim, kp, kpp, kp_prov, kpp_prov).with_stderr(se))
}

/// `K_{P_i P_j} = ∫∫ K dP_i dP_j`, closed form for Gaussian kernels and
/// components, otherwise the 1-fold integral of `K_{P_i}` against `P_j`.
fn cross_term(
    kernel: &Kernel,
    ei: &Embedding,
    pi: &Measure,
    pj: &Measure,
) -> Result<(f64, f64, Provenance)> {
    if let (Kernel::Gaussian(g), Measure::Gaussian(a), Measure::Gaussian(b)) = (kernel, pi, pj) {
        return Ok((gauss_cross_kpq(g, a, b)?, 0.0, Provenance::ClosedForm));
    }
    let kinks = if pj.dim() == 1 {
        kernel.outer_kinks(&pi.endpoints_1d())
    } else {
        Vec::new()
    };
    let est = oracle::integrate(
        pj,
        &|x| ei.kp(x),
        &kinks,
        kernel.has_singular_kinks(),
        Budget::default(),
        FALLBACK_SEED,
    )?;
    Ok((est.value, est.stderr, Provenance::NumericFallback))
}

/// Embedding of `kernel` against the mixture `Σ w_j P_j`.
///
/// `K_P = Σ w_j K_{P_j}` and `K_PP = Σ_{i,j} w_i w_j K_{P_i P_j}` with true
/// cross terms between components.
pub fn mixture_embed(
    kernel: &Kernel,
    components: &[Measure],
    weights: &[f64],
) -> Result<Embedding> {
    let parts = components
        .iter()
        .map(|c| embed(kernel, c))
        .collect::<Result<Vec<_>>>()?;
    let pair = format!("{}/mixture", kernel.family());
    if parts
        .iter()
        .any(|e| e.kp_provenance != Provenance::ClosedForm)
    {
        // Cross terms would need nested numerical integrals.
        let mixture = Measure::Mixture {
            components: components.to_vec(),
            weights: weights.to_vec(),
        };
        return dictionary::numeric_fallback(kernel, &mixture);
    }
    let mut kpp = 0.0;
    let mut var = 0.0;
    let mut kpp_prov = worst(&parts, |e| e.kpp_provenance);
    for i in 0..parts.len() {
        kpp += weights[i] * weights[i] * parts[i].kpp;
        var += (weights[i] * weights[i] * parts[i].kpp_stderr).powi(2);
        for j in i + 1..parts.len() {
            let (v, se, prov) = cross_term(kernel, &parts[i], &components[i], &components[j])?;
            kpp += 2.0 * weights[i] * weights[j] * v;
            var += (2.0 * weights[i] * weights[j] * se).powi(2);
            kpp_prov = kpp_prov.max(prov);
        }
    }
    let dim = parts[0].dim;
    let w = weights.to_vec();
    let kp = move |x: &[f64]| {
        let mut acc = 0.0;
        for (e, wj) in parts.iter().zip(&w) {
            acc += wj * e.kp(x)?;
        }
        Ok(acc)
    };
    Ok(
        Embedding::new(pair, dim, kp, kpp, Provenance::ClosedForm, kpp_prov)
            .with_stderr(var.sqrt()),
    )
}

/// Embedding of the composed kernel `K(ψ⁻¹x, ψ⁻¹y)` against the pushforward
/// `ψ_# Q`, from the embedding of `K` against `Q`: `K_P(x) = K_Q(ψ⁻¹x)` and
/// `K_PP` is unchanged.
pub fn pushforward_embed(base: Embedding, map: Transform, pair: &str) -> Embedding {
    let inner = base.clone();
    let kp = move |x: &[f64]| {
        map.check_range(x)?;
        inner.kp(&map.inverse(x))
    };
    Embedding::new(
        pair,
        base.dim,
        kp,
        base.kpp,
        base.kp_provenance,
        base.kpp_provenance,
    )
    .with_stderr(base.kpp_stderr)
}

/// Importance reweighting `g = f·p/q`, so that `∫ g dQ = ∫ f dP`.
pub fn change_of_measure<'a>(
    f: impl Fn(&[f64]) -> Result<f64> + 'a,
    p: &'a Measure,
    q: &'a Measure,
) -> impl Fn(&[f64]) -> Result<f64> + 'a {
    move |x| {
        let px = p.density(x)?;
        if px == 0.0 {
            return Ok(0.0);
        }
        let qx = q.density(x)?;
        if qx <= 0.0 {
            return Err(Error::OutsideDomain(format!(
                "proposal density vanishes at {x:?} where the target does not"
            )));
        }
        Ok(f(x)? * px / qx)
    }
}

/// `K_P = B·k_P` and `K_PP = B·k_PP` for a symmetric PSD matrix `B`.
pub fn matrix_valued_embed(scalar: Embedding, matrix: DMatrix<f64>) -> Result<MatrixEmbedding> {
    check_psd(&matrix)?;
    Ok(MatrixEmbedding { scalar, matrix })
}
