use serde::{Deserialize, Serialize};

use crate::transform::Transform;

/// One `c_α x^α y^α` term of a power-series kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTerm {
    pub alpha: Vec<u32>,
    pub coefficient: f64,
}

/// A factor of a product kernel acting on the coordinates `dims`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductFactor {
    pub kernel: KernelSpec,
    pub dims: Vec<usize>,
}

/// Serializable description of a kernel.
///
/// The JSON form is tagged by `family`, for example
/// `{"family": "matern", "nu": 1.5, "lengthscale": 0.3}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// `exp(-½ (x-y)ᵀ Λ⁻¹ (x-y))`. Give either per-dimension `lengthscales`
    /// (`Λ = diag(ℓ²)`) or the full matrix Λ as `lengthscale_matrix`.
    Gaussian {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lengthscales: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lengthscale_matrix: Option<Vec<Vec<f64>>>,
    },
    /// Half-integer Matérn, `nu ∈ {0.5, 1.5, 2.5, 3.5}`.
    Matern {
        nu: f64,
        lengthscale: f64,
    },
    /// Wendland kernel of order 0, 2 or 4.
    Wendland {
        order: u32,
        lengthscale: f64,
    },
    /// Fractional Brownian motion on `domain = [a, b]`, `a >= 0`.
    Fbm {
        hurst: f64,
        domain: [f64; 2],
    },
    PowerSeries {
        terms: Vec<PowerTerm>,
    },
    /// `2 - ‖x - y‖` on the unit sphere.
    SphereSobolev32,
    /// `48 exp(-12 ‖x - y‖²)` on the unit sphere.
    SphereSmooth,
    /// Periodic Sobolev kernel of order `2r`, `1 <= r <= 6`.
    PeriodicSobolev {
        r: u32,
    },
    /// Langevin Stein kernel built on `base` against the paired measure.
    Stein {
        base: Box<KernelSpec>,
        #[serde(default)]
        offset: f64,
    },
    Sum {
        children: Vec<KernelSpec>,
        weights: Vec<f64>,
    },
    Product {
        factors: Vec<ProductFactor>,
    },
    /// `B · K(x, y)` for a symmetric positive semi-definite `matrix` B.
    MatrixValued {
        base: Box<KernelSpec>,
        matrix: Vec<Vec<f64>>,
    },
    /// `K(ψ⁻¹(x), ψ⁻¹(y))`: the base kernel seen through the map ψ of a
    /// pushforward measure `ψ_# Q`.
    Composed {
        base: Box<KernelSpec>,
        map: Transform,
    },
}

impl KernelSpec {
    pub fn gaussian(lengthscales: Vec<f64>) -> Self {
        KernelSpec::Gaussian {
            lengthscales: Some(lengthscales),
            lengthscale_matrix: None,
        }
    }

    pub fn gaussian_matrix(lambda: Vec<Vec<f64>>) -> Self {
        KernelSpec::Gaussian {
            lengthscales: None,
            lengthscale_matrix: Some(lambda),
        }
    }

    pub fn matern(nu: f64, lengthscale: f64) -> Self {
        KernelSpec::Matern { nu, lengthscale }
    }

    pub fn wendland(order: u32, lengthscale: f64) -> Self {
        KernelSpec::Wendland { order, lengthscale }
    }

    pub fn fbm(hurst: f64, a: f64, b: f64) -> Self {
        KernelSpec::Fbm {
            hurst,
            domain: [a, b],
        }
    }

    pub fn power_series(terms: &[(&[u32], f64)]) -> Self {
        KernelSpec::PowerSeries {
            terms: terms
                .iter()
                .map(|(a, c)| PowerTerm {
                    alpha: a.to_vec(),
                    coefficient: *c,
                })
                .collect(),
        }
    }
}
