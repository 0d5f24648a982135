//! Closed-form embeddings `(K_P, K_PP)` for the supported kernel/measure
//! pairs, with a numerical fallback for everything else.
//!
//! [`embed`] picks the most specific route available:
//!
//! | kernel | measure | `K_P` | `K_PP` |
//! |---|---|---|---|
//! | gaussian (diagonal) | uniform box | closed | closed |
//! | gaussian | gaussian | closed | closed |
//! | matérn `ν ≤ 7/2` | uniform interval | closed | closed |
//! | matérn `ν ≤ 5/2` | 1-d gaussian | closed | 1-d quadrature of `K_P` |
//! | wendland 0 | uniform interval | closed | closed |
//! | wendland 0, 2 | 1-d gaussian | closed | 1-d quadrature of `K_P` |
//! | fbm | uniform interval | closed | closed |
//! | power series | uniform box, centred diagonal gaussian | closed | closed |
//! | sphere kernels | uniform on `S²` | constant | constant |
//! | periodic Sobolev | uniform on `[0, 1]` or `S¹` | 1 | 1 |
//! | stein | its target | `C` | `C` |
//! | any | empirical | exact sum | exact sum |
//!
//! Sums, products, mixtures and matching pushforward/composed pairs are
//! reduced to these through [`crate::combinators`].

mod constant;
mod fbm;
mod gaussian;
mod matern;
mod power_series;
mod wendland;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::combinators;
use crate::error::{check_dim, Error, Result};
use crate::kernels::{Kernel, KernelSpec};
use crate::measures::{Measure, MeasureSpec};
use crate::oracle::{self, Budget};

pub use constant::{
    empirical_embed, periodic_sobolev_embed, sphere_embed, stein_embed, SphereKind,
};
pub use fbm::fbm_uniform;
pub use gaussian::{gauss_cross_kpq, gauss_gauss, gauss_uniform};
pub use matern::{
    matern_gauss_kp, matern_gauss_kp_value, matern_uniform_general, matern_uniform_special,
    MaternGaussianShifts, MaternUniformCoefficients,
};
pub use power_series::{powerseries_gauss, powerseries_uniform};
pub use wendland::{
    wendland0_uniform, wendland0_uniform_kp, wendland0_uniform_kpp, wendland_gauss_kp,
    wendland_gauss_kp_value,
};

/// Seed used by numeric-fallback embeddings.
pub const FALLBACK_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    NumericFallback,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed_form",
            Provenance::NumericFallback => "numeric_fallback",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type KpFn = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;

/// `K_P` as a function and `K_PP` as a number.
#[derive(Clone)]
pub struct Embedding {
    /// `"<kernel family>/<measure family>"`.
    pub pair: String,
    /// Dimension of the points `K_P` accepts.
    pub dim: usize,
    kp: KpFn,
    pub kpp: f64,
    /// Standard error of `kpp` when it came from Monte Carlo, else 0.
    pub kpp_stderr: f64,
    pub kp_provenance: Provenance,
    pub kpp_provenance: Provenance,
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Embedding")
            .field("pair", &self.pair)
            .field("dim", &self.dim)
            .field("kpp", &self.kpp)
            .field("kpp_stderr", &self.kpp_stderr)
            .field("kp_provenance", &self.kp_provenance)
            .field("kpp_provenance", &self.kpp_provenance)
            .finish()
    }
}

impl Embedding {
    pub fn new(
        pair: impl Into<String>,
        dim: usize,
        kp: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
        kpp: f64,
        kp_provenance: Provenance,
        kpp_provenance: Provenance,
    ) -> Self {
        Embedding {
            pair: pair.into(),
            dim,
            kp: Arc::new(kp),
            kpp,
            kpp_stderr: 0.0,
            kp_provenance,
            kpp_provenance,
        }
    }

    pub fn closed_form(
        pair: impl Into<String>,
        dim: usize,
        kp: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
        kpp: f64,
    ) -> Self {
        Embedding::new(
            pair,
            dim,
            kp,
            kpp,
            Provenance::ClosedForm,
            Provenance::ClosedForm,
        )
    }

    /// A constant embedding `K_P ≡ c`, `K_PP = c`.
    pub fn constant(pair: impl Into<String>, dim: usize, c: f64) -> Self {
        Embedding::closed_form(pair, dim, move |_| Ok(c), c)
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.kpp_stderr = stderr;
        self
    }

    /// `K_P(x)`.
    pub fn kp(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        (self.kp)(x)
    }

    /// `ClosedForm` only when both halves are.
    pub fn provenance(&self) -> Provenance {
        self.kp_provenance.max(self.kpp_provenance)
    }
}

/// Embedding of a matrix-valued kernel `B·K`: `K_P = B·k_P` and `K_PP = B·k_PP`.
#[derive(Debug, Clone)]
pub struct MatrixEmbedding {
    pub scalar: Embedding,
    pub matrix: DMatrix<f64>,
}

impl MatrixEmbedding {
    pub fn kp(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(&self.matrix * self.scalar.kp(x)?)
    }

    pub fn kpp(&self) -> DMatrix<f64> {
        &self.matrix * self.scalar.kpp
    }

    pub fn provenance(&self) -> Provenance {
        self.scalar.provenance()
    }
}

pub(crate) fn pair_id(kernel: &Kernel, measure: &Measure) -> String {
    format!("{}/{}", kernel.family(), measure.family())
}

/// Compiles both specs and embeds them.
pub fn embed_spec(kernel: &KernelSpec, measure: &MeasureSpec) -> Result<Embedding> {
    let measure = Measure::compile(measure)?;
    let kernel = Kernel::compile(kernel, Some(&measure))?;
    embed(&kernel, &measure)
}

/// The embedding of `kernel` against `measure`.
pub fn embed(kernel: &Kernel, measure: &Measure) -> Result<Embedding> {
    let d = measure.dim();
    if let Some(kd) = kernel.dim() {
        check_dim(kd, d)?;
    }
    if kernel.is_matrix_valued() {
        return Err(Error::Unsupported(
            "matrix-valued kernels are embedded with embed_matrix".into(),
        ));
    }
    if let Kernel::Stein(s) = kernel {
        return Ok(stein_embed(s, measure));
    }
    if let Measure::Unnormalized(u) = measure {
        return Err(Error::Unsupported(format!(
            "the unnormalized measure '{}' only pairs with stein kernels",
            u.name
        )));
    }
    if let Measure::Empirical { points, weights } = measure {
        return empirical_embed(kernel, points, weights);
    }
    if let Kernel::Sum { children, weights } = kernel {
        let parts = children
            .iter()
            .map(|c| embed(c, measure))
            .collect::<Result<Vec<_>>>()?;
        return Ok(combinators::sum_embed(
            parts,
            weights,
            &pair_id(kernel, measure),
        ));
    }
    if let Measure::Mixture {
        components,
        weights,
    } = measure
    {
        return combinators::mixture_embed(kernel, components, weights);
    }
    if let Some(e) = dictionary_entry(kernel, measure)? {
        return Ok(e);
    }
    if let Kernel::Product { factors } = kernel {
        let blocks: Option<Vec<(Embedding, Vec<usize>)>> = factors
            .iter()
            .map(|(k, dims)| {
                let m = measure.marginal(dims)?;
                let e = embed(k, &m).ok()?;
                (e.provenance() == Provenance::ClosedForm).then_some((e, dims.clone()))
            })
            .collect();
        if let Some(blocks) = blocks {
            return combinators::product_embed(blocks, &pair_id(kernel, measure));
        }
    }
    if let (Kernel::Composed { base, map }, Measure::Pushforward { base: q, map: m }) =
        (kernel, measure)
    {
        if map == m {
            let inner = embed(base, q)?;
            return Ok(combinators::pushforward_embed(
                inner,
                map.clone(),
                &pair_id(kernel, measure),
            ));
        }
    }
    numeric_fallback(kernel, measure)
}

/// The pair-specific closed forms; `None` when the pair has none.
fn dictionary_entry(kernel: &Kernel, measure: &Measure) -> Result<Option<Embedding>> {
    let pair = pair_id(kernel, measure);
    let e = match (kernel, measure) {
        (Kernel::Gaussian(g), Measure::UniformBox { a, b }) => match &g.lengthscales {
            Some(ls) => gauss_uniform(ls, a, b)?,
            None => return Ok(None),
        },
        (Kernel::Gaussian(g), Measure::Gaussian(p)) => gauss_gauss(g, p)?,
        (Kernel::Matern { n, lengthscale }, Measure::UniformBox { a, b }) if a.len() == 1 => {
            matern_uniform_general(*n, *lengthscale, a[0], b[0])?
        }
        (Kernel::Matern { n, lengthscale }, Measure::Gaussian(p)) if p.dim() == 1 && *n <= 2 => {
            matern_gauss_kp(*n, *lengthscale, p.mean[0], p.chol[(0, 0)])?
        }
        (
            Kernel::Wendland {
                order: 0,
                lengthscale,
            },
            Measure::UniformBox { a, b },
        ) if a.len() == 1 => wendland0_uniform(*lengthscale, a[0], b[0])?,
        (Kernel::Wendland { order, lengthscale }, Measure::Gaussian(p))
            if p.dim() == 1 && *order <= 2 =>
        {
            wendland_gauss_kp(*order, *lengthscale, p.mean[0], p.chol[(0, 0)])?
        }
        (
            Kernel::Fbm {
                hurst,
                a: lo,
                b: hi,
            },
            Measure::UniformBox { a, b },
        ) if a.len() == 1 => {
            if a[0] < *lo || b[0] > *hi {
                return Ok(None);
            }
            fbm_uniform(*hurst, a[0], b[0])?
        }
        (Kernel::PowerSeries { terms, .. }, Measure::UniformBox { a, b }) => {
            powerseries_uniform(terms, a, b)?
        }
        (Kernel::PowerSeries { terms, .. }, Measure::Gaussian(p)) => match &p.variances {
            Some(v) if p.is_centered() => powerseries_gauss(terms, v)?,
            _ => return Ok(None),
        },
        (Kernel::SphereSobolev32, Measure::Sphere { dim: 2 }) => {
            sphere_embed(SphereKind::Sobolev32)
        }
        (Kernel::SphereSmooth, Measure::Sphere { dim: 2 }) => sphere_embed(SphereKind::Smooth),
        (Kernel::PeriodicSobolev { .. }, m) if is_unit_circle_measure(m) => {
            periodic_sobolev_embed(m.dim())
        }
        _ => return Ok(None),
    };
    Ok(Some(Embedding { pair, ..e }))
}

fn is_unit_circle_measure(m: &Measure) -> bool {
    match m {
        Measure::UniformBox { a, b } => a.len() == 1 && a[0] == 0.0 && b[0] == 1.0,
        Measure::Sphere { dim } => *dim == 1,
        _ => false,
    }
}

/// `E f(Z)` for `Z ~ N(μ, σ²)` by 200-node Gauss–Hermite.
pub(crate) fn gauss_hermite_mean(f: &dyn Fn(f64) -> f64, mu: f64, sigma: f64) -> f64 {
    let rule = oracle::rules::gauss_hermite(Budget::default().nodes);
    let s = std::f64::consts::SQRT_2 * sigma;
    let total: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(z, w)| w * f(mu + s * z))
        .sum();
    total / std::f64::consts::PI.sqrt()
}

/// `K_P` and `K_PP` from the oracle with the default budget.
pub fn numeric_fallback(kernel: &Kernel, measure: &Measure) -> Result<Embedding> {
    numeric_fallback_with(kernel, measure, Budget::default(), FALLBACK_SEED)
}

pub fn numeric_fallback_with(
    kernel: &Kernel,
    measure: &Measure,
    budget: Budget,
    seed: u64,
) -> Result<Embedding> {
    log::debug!("numeric fallback for {}", pair_id(kernel, measure));
    let kpp = oracle::estimate_kpp(kernel, measure, budget, seed)?;
    let (k, m) = (kernel.clone(), measure.clone());
    let kp = move |x: &[f64]| Ok(oracle::estimate_kp(&k, &m, x, budget, seed)?.value);
    Ok(Embedding::new(
        pair_id(kernel, measure),
        measure.dim(),
        kp,
        kpp.value,
        Provenance::NumericFallback,
        Provenance::NumericFallback,
    )
    .with_stderr(kpp.stderr))
}

/// Embedding of a matrix-valued kernel, or of a scalar kernel as a 1×1 matrix.
pub fn embed_matrix(kernel: &Kernel, measure: &Measure) -> Result<MatrixEmbedding> {
    match kernel {
        Kernel::MatrixValued { base, matrix } => {
            combinators::matrix_valued_embed(embed(base, measure)?, matrix.clone())
        }
        other => Ok(MatrixEmbedding {
            scalar: embed(other, measure)?,
            matrix: DMatrix::identity(1, 1),
        }),
    }
}
