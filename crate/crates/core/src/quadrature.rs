//! Bayesian quadrature, worst-case errors and MMD built on an embedding.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dictionary::{gauss_cross_kpq, gauss_gauss, Embedding};
use crate::error::{check_dim, Error, Result};
use crate::kernels::Kernel;
use crate::measures::Measure;

/// Negative squared errors down to this are treated as rounding.
pub const NEGATIVE_TOL: f64 = 1e-10;
/// Relative jitters tried in turn, as multiples of the mean Gram diagonal.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-12, 1e-10, 1e-8];
const DISTINCT_TOL: f64 = 1e-12;

/// Nodes, optional values, and the Gram matrix and embedding vector they induce.
#[derive(Debug, Clone)]
pub struct QuadratureProblem {
    pub nodes: Vec<Vec<f64>>,
    pub values: Option<Vec<f64>>,
    /// `C_ij = K(x_i, x_j)`.
    pub gram: DMatrix<f64>,
    /// `m_i = K_P(x_i)`.
    pub m: DVector<f64>,
    pub kpp: f64,
    /// Extra diagonal term added before the jitter ladder.
    pub jitter: f64,
}

impl QuadratureProblem {
    pub fn new(
        kernel: &Kernel,
        embedding: &Embedding,
        nodes: Vec<Vec<f64>>,
        values: Option<Vec<f64>>,
    ) -> Result<Self> {
        for x in &nodes {
            check_dim(embedding.dim, x.len())?;
        }
        if let Some(v) = &values {
            check_dim(nodes.len(), v.len())?;
        }
        for i in 0..nodes.len() {
            for j in 0..i {
                let gap = nodes[i]
                    .iter()
                    .zip(&nodes[j])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if gap <= DISTINCT_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "nodes {j} and {i} coincide"
                    )));
                }
            }
        }
        let n = nodes.len();
        let rows = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..=i)
                    .map(|j| kernel.eval(&nodes[i], &nodes[j]))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let gram = DMatrix::from_fn(n, n, |i, j| if j <= i { rows[i][j] } else { rows[j][i] });
        let m = nodes
            .iter()
            .map(|x| embedding.kp(x))
            .collect::<Result<Vec<f64>>>()?;
        Ok(QuadratureProblem {
            nodes,
            values,
            gram,
            m: DVector::from_vec(m),
            kpp: embedding.kpp,
            jitter: 0.0,
        })
    }

    pub fn with_jitter(mut self, jitter: f64) -> Self {
        self.jitter = jitter;
        self
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Cholesky factor of `C + (jitter + λ)·I`, climbing the ladder for `λ`.
    /// Returns the factor and the total diagonal term applied.
    fn factor(&self) -> Result<(Cholesky<f64, Dyn>, f64)> {
        let n = self.len();
        let mean_diag = self.gram.diagonal().mean().abs().max(f64::MIN_POSITIVE);
        for rel in JITTER_LADDER {
            let applied = self.jitter + rel * mean_diag;
            let mut c = self.gram.clone();
            for i in 0..n {
                c[(i, i)] += applied;
            }
            if let Some(ch) = Cholesky::new(c) {
                if rel > 0.0 {
                    log::warn!("Gram matrix needed jitter {applied:e}");
                }
                return Ok((ch, applied));
            }
        }
        Err(Error::IllConditioned(
            self.jitter + JITTER_LADDER[3] * mean_diag,
        ))
    }

    fn solve(&self) -> Result<(DVector<f64>, f64, Cholesky<f64, Dyn>)> {
        let (ch, applied) = self.factor()?;
        let w = ch.solve(&self.m);
        let mut c = self.gram.clone();
        for i in 0..self.len() {
            c[(i, i)] += applied;
        }
        let residual = (&c * &w - &self.m).norm();
        if !(residual <= 1e-8 * self.m.norm()) {
            return Err(Error::IllConditioned(applied));
        }
        Ok((w, applied, ch))
    }
}

/// Posterior of the integral given the values at the nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BqPosterior {
    pub mean: f64,
    pub variance: f64,
    pub weights: Vec<f64>,
    pub jitter_applied: f64,
}

fn clamp_nonnegative(v: f64, what: &str) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -NEGATIVE_TOL {
        log::warn!("{what} {v:e} clamped to zero");
        Ok(0.0)
    } else {
        Err(Error::NumericalInconsistency(format!(
            "{what} is {v:e}; kernel and embedding disagree"
        )))
    }
}

/// `μ = mᵀC⁻¹Y` and `σ² = K_PP - mᵀC⁻¹m`.
pub fn bq_posterior(problem: &QuadratureProblem) -> Result<BqPosterior> {
    let y = problem.values.as_ref().ok_or_else(|| {
        Error::InvalidParameter("Bayesian quadrature needs function values".into())
    })?;
    if problem.is_empty() {
        return Ok(BqPosterior {
            mean: 0.0,
            variance: problem.kpp,
            weights: Vec::new(),
            jitter_applied: 0.0,
        });
    }
    let (w, applied, _) = problem.solve()?;
    let mean = w.iter().zip(y).map(|(a, b)| a * b).sum();
    let variance = clamp_nonnegative(problem.kpp - problem.m.dot(&w), "posterior variance")?;
    Ok(BqPosterior {
        mean,
        variance,
        weights: w.iter().copied().collect(),
        jitter_applied: applied,
    })
}

/// The weights `w = C⁻¹m` minimising the worst-case error.
pub fn optimal_weights(problem: &QuadratureProblem) -> Result<Vec<f64>> {
    if problem.is_empty() {
        return Ok(Vec::new());
    }
    Ok(problem.solve()?.0.iter().copied().collect())
}

/// `√(K_PP - 2 wᵀm + wᵀCw)`.
pub fn wce(problem: &QuadratureProblem, weights: &[f64]) -> Result<f64> {
    check_dim(problem.len(), weights.len())?;
    let w = DVector::from_column_slice(weights);
    let r = problem.kpp - 2.0 * w.dot(&problem.m) + w.dot(&(&problem.gram * &w));
    Ok(clamp_nonnegative(r, "squared worst-case error")?.sqrt())
}

/// `MMD²(P, Q) = K_PP - 2 K_PQ + K_QQ` for `Q` empirical, or for Gaussian
/// `P` and `Q` under a Gaussian kernel.
pub fn mmd2(kernel: &Kernel, p: &Measure, p_embedding: &Embedding, q: &Measure) -> Result<f64> {
    let v = match q {
        Measure::Empirical { points, weights } => {
            let mut kpq = 0.0;
            for (x, w) in points.iter().zip(weights) {
                kpq += w * p_embedding.kp(x)?;
            }
            let kqq = points
                .par_iter()
                .zip(weights)
                .map(|(x, wx)| {
                    let mut acc = 0.0;
                    for (y, wy) in points.iter().zip(weights) {
                        acc += wy * kernel.eval(x, y)?;
                    }
                    Ok(wx * acc)
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .sum::<f64>();
            p_embedding.kpp - 2.0 * kpq + kqq
        }
        Measure::Gaussian(gq) => match (kernel, p) {
            (Kernel::Gaussian(k), Measure::Gaussian(gp)) => {
                gauss_gauss(k, gp)?.kpp - 2.0 * gauss_cross_kpq(k, gp, gq)?
                    + gauss_gauss(k, gq)?.kpp
            }
            _ => {
                return Err(Error::Unsupported(
                    "Gaussian Q needs a Gaussian kernel and a Gaussian P".into(),
                ))
            }
        },
        other => {
            return Err(Error::Unsupported(format!(
                "MMD against a {} measure",
                other.family()
            )))
        }
    };
    clamp_nonnegative(v, "squared MMD")
}
