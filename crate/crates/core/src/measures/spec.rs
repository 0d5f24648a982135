use serde::{Deserialize, Serialize};

use crate::transform::Transform;

/// Serializable description of a probability measure, tagged by `family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Uniform on the box `Π [a_i, b_i]`, given as `[[a_1, b_1], ...]`.
    UniformBox { bounds: Vec<[f64; 2]> },
    /// Gaussian with either a full `covariance` or diagonal `variances`.
    Gaussian {
        mean: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        covariance: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variances: Option<Vec<f64>>,
    },
    /// Uniform measure on the unit sphere `S^dim ⊂ R^{dim+1}`, `dim ∈ {1, 2}`.
    SphereUniform { dim: usize },
    Mixture {
        components: Vec<MeasureSpec>,
        weights: Vec<f64>,
    },
    /// `map_# base`: samples are `map(z)` for `z ~ base`.
    Pushforward {
        base: Box<MeasureSpec>,
        map: Transform,
    },
    /// Weighted point set. `path` is resolved into `points` by the caller
    /// (the CLI reads CSV or JSON files); weights default to uniform.
    Empirical {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
    },
    /// A density known up to normalisation, chosen from the built-in list
    /// (`"quartic"`: `exp(log_scale - Σ x_i⁴ / 4)`).
    UnnormalizedScore {
        density: String,
        dim: usize,
        #[serde(default)]
        log_scale: f64,
    },
}

impl MeasureSpec {
    pub fn uniform(bounds: &[(f64, f64)]) -> Self {
        MeasureSpec::UniformBox {
            bounds: bounds.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn gaussian_diag(mean: Vec<f64>, variances: Vec<f64>) -> Self {
        MeasureSpec::Gaussian {
            mean,
            covariance: None,
            variances: Some(variances),
        }
    }

    pub fn gaussian_full(mean: Vec<f64>, covariance: Vec<Vec<f64>>) -> Self {
        MeasureSpec::Gaussian {
            mean,
            covariance: Some(covariance),
            variances: None,
        }
    }

    pub fn standard_normal(dim: usize) -> Self {
        Self::gaussian_diag(vec![0.0; dim], vec![1.0; dim])
    }

    pub fn empirical(points: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Self {
        MeasureSpec::Empirical {
            points: Some(points),
            weights,
            path: None,
        }
    }
}
