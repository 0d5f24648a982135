//! Embeddings that are constant in `x`, and exact sums over empirical measures.

use rayon::prelude::*;

use super::Embedding;
use crate::error::Result;
use crate::kernels::{periodic_coordinate, unit_normalize, Kernel};
use crate::stein::SteinKernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereKind {
    /// `2 - ‖x - y‖`.
    Sobolev32,
    /// `48 exp(-12 ‖x - y‖²)`.
    Smooth,
}

/// The uniform measure on `S²`: `2/3` for `Sobolev32`, `1 - e^{-48}` for `Smooth`.
pub fn sphere_embed(kind: SphereKind) -> Embedding {
    let (c, name) = match kind {
        SphereKind::Sobolev32 => (2.0 / 3.0, "sphere_sobolev32/sphere_uniform"),
        SphereKind::Smooth => (-(-48.0f64).exp_m1(), "sphere_smooth/sphere_uniform"),
    };
    Embedding::closed_form(name, 3, move |x| unit_normalize(x).map(|_| c), c)
}

/// Periodic Sobolev kernels against the uniform measure on `[0, 1]` (`dim = 1`)
/// or on the circle `S¹` (`dim = 2`): every Bernoulli term integrates to zero.
pub fn periodic_sobolev_embed(dim: usize) -> Embedding {
    let pair = if dim == 1 {
        "periodic_sobolev/uniform_box"
    } else {
        "periodic_sobolev/sphere_uniform"
    };
    Embedding::closed_form(pair, dim, |x| periodic_coordinate(x).map(|_| 1.0), 1.0)
}

/// The Langevin Stein kernel against its own target: `K_P ≡ C`, `K_PP = C`.
pub fn stein_embed(kernel: &SteinKernel, measure: &crate::measures::Measure) -> Embedding {
    Embedding::constant(
        format!("stein/{}", measure.family()),
        kernel.dim(),
        kernel.offset(),
    )
}

/// Exact weighted sums `Σ w_i K(x, x_i)` and `Σ_{ij} w_i w_j K(x_i, x_j)`.
pub fn empirical_embed(kernel: &Kernel, points: &[Vec<f64>], weights: &[f64]) -> Result<Embedding> {
    let rows = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..points.len() {
                acc += weights[j] * kernel.eval(&points[i], &points[j])?;
            }
            Ok(weights[i] * acc)
        })
        .collect::<Result<Vec<f64>>>()?;
    let kpp = rows.iter().sum();
    let (k, pts, w) = (kernel.clone(), points.to_vec(), weights.to_vec());
    let kp = move |x: &[f64]| {
        let mut acc = 0.0;
        for (p, wi) in pts.iter().zip(&w) {
            acc += wi * k.eval(x, p)?;
        }
        Ok(acc)
    };
    Ok(Embedding::closed_form(
        format!("{}/empirical", kernel.family()),
        points[0].len(),
        kp,
        kpp,
    ))
}
