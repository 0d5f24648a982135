//! Probability measures: densities, scores and seeded samplers.

mod spec;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

pub use spec::MeasureSpec;

use crate::error::{check_dim, Error, Result};
use crate::kernels::{checked_cholesky, matrix_from_rows};
use crate::rng::StreamRng;
use crate::transform::Transform;

const WEIGHT_TOL: f64 = 1e-12;

/// Gaussian measure with its Cholesky factor cached.
#[derive(Debug, Clone)]
pub struct GaussianMeasure {
    pub mean: Vec<f64>,
    pub cov: DMatrix<f64>,
    /// Lower Cholesky factor of the covariance.
    pub chol: DMatrix<f64>,
    /// Diagonal variances, when the covariance is diagonal.
    pub variances: Option<Vec<f64>>,
    log_norm: f64,
}

impl GaussianMeasure {
    pub fn new(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        check_dim(mean.len(), cov.nrows())?;
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter(
                "gaussian mean must be finite".into(),
            ));
        }
        let chol = checked_cholesky(&cov, "covariance")?.l();
        let d = mean.len();
        let is_diag = (0..d).all(|i| (0..d).all(|j| i == j || cov[(i, j)] == 0.0));
        let variances = is_diag.then(|| (0..d).map(|i| cov[(i, i)]).collect());
        let log_det: f64 = (0..d).map(|i| 2.0 * chol[(i, i)].ln()).sum();
        let log_norm = -0.5 * d as f64 * std::f64::consts::TAU.ln() - 0.5 * log_det;
        Ok(GaussianMeasure {
            mean,
            cov,
            chol,
            variances,
            log_norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `L⁻¹ (x - μ)`.
    fn whiten(&self, x: &[f64]) -> DVector<f64> {
        let d = DVector::from_iterator(x.len(), x.iter().zip(&self.mean).map(|(a, m)| a - m));
        self.chol
            .solve_lower_triangular(&d)
            .expect("Cholesky factor is non-singular")
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        self.log_norm - 0.5 * self.whiten(x).norm_squared()
    }

    /// `-Σ⁻¹ (x - μ)`.
    pub fn score(&self, x: &[f64]) -> Vec<f64> {
        let w = self.whiten(x);
        let s = self
            .chol
            .transpose()
            .solve_upper_triangular(&w)
            .expect("non-singular");
        s.iter().map(|v| -v).collect()
    }

    pub fn is_centered(&self) -> bool {
        self.mean.iter().all(|&m| m == 0.0)
    }
}

type LogDensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type ScoreFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A density known up to a constant, through its log and its score.
#[derive(Clone)]
pub struct UnnormalizedDensity {
    pub name: String,
    pub dim: usize,
    pub log_density: LogDensityFn,
    pub score: ScoreFn,
}

impl fmt::Debug for UnnormalizedDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UnnormalizedDensity({}, dim {})", self.name, self.dim)
    }
}

impl UnnormalizedDensity {
    pub fn new(
        name: &str,
        dim: usize,
        log_density: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        score: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        UnnormalizedDensity {
            name: name.to_string(),
            dim,
            log_density: Arc::new(log_density),
            score: Arc::new(score),
        }
    }

    /// `exp(log_scale - Σ x_i⁴ / 4)`, with score `-x³`.
    pub fn quartic(dim: usize, log_scale: f64) -> Self {
        Self::new(
            "quartic",
            dim,
            move |x| log_scale - x.iter().map(|v| v.powi(4)).sum::<f64>() / 4.0,
            |x| x.iter().map(|v| -v * v * v).collect(),
        )
    }
}

#[derive(Debug, Clone)]
pub enum Measure {
    UniformBox {
        a: Vec<f64>,
        b: Vec<f64>,
    },
    Gaussian(GaussianMeasure),
    /// Uniform on `S^dim`, with points in `R^{dim+1}`.
    Sphere {
        dim: usize,
    },
    Mixture {
        components: Vec<Measure>,
        weights: Vec<f64>,
    },
    Pushforward {
        base: Box<Measure>,
        map: Transform,
    },
    Empirical {
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
    Unnormalized(UnnormalizedDensity),
}

fn check_weights(w: &[f64], what: &str) -> Result<()> {
    if w.iter().any(|&v| !(v.is_finite() && v >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "{what} weights must be non-negative"
        )));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::InvalidParameter(format!(
            "{what} weights sum to {s}, not 1"
        )));
    }
    Ok(())
}

impl Measure {
    pub fn compile(spec: &MeasureSpec) -> Result<Measure> {
        Ok(match spec {
            MeasureSpec::UniformBox { bounds } => {
                if bounds.is_empty() {
                    return Err(Error::InvalidParameter(
                        "uniform_box needs at least one interval".into(),
                    ));
                }
                for [a, b] in bounds {
                    if !(a.is_finite() && b.is_finite() && b > a) {
                        return Err(Error::InvalidParameter(format!(
                            "interval [{a}, {b}] must have a < b"
                        )));
                    }
                }
                Measure::UniformBox {
                    a: bounds.iter().map(|b| b[0]).collect(),
                    b: bounds.iter().map(|b| b[1]).collect(),
                }
            }
            MeasureSpec::Gaussian {
                mean,
                covariance,
                variances,
            } => {
                let cov = match (covariance, variances) {
                    (Some(c), None) => matrix_from_rows(c, "covariance")?,
                    (None, Some(v)) => {
                        if v.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
                            return Err(Error::InvalidParameter(
                                "variances must be positive".into(),
                            ));
                        }
                        DMatrix::from_diagonal(&DVector::from_column_slice(v))
                    }
                    _ => {
                        return Err(Error::InvalidParameter(
                            "gaussian measure needs exactly one of covariance, variances".into(),
                        ))
                    }
                };
                Measure::Gaussian(GaussianMeasure::new(mean.clone(), cov)?)
            }
            MeasureSpec::SphereUniform { dim } => {
                if !(1..=2).contains(dim) {
                    return Err(Error::Unsupported(format!(
                        "sphere S^{dim}; only S^1 and S^2 are available"
                    )));
                }
                Measure::Sphere { dim: *dim }
            }
            MeasureSpec::Mixture {
                components,
                weights,
            } => {
                if components.is_empty() || components.len() != weights.len() {
                    return Err(Error::InvalidParameter(
                        "mixture needs one weight per component".into(),
                    ));
                }
                check_weights(weights, "mixture")?;
                let components = components
                    .iter()
                    .map(Measure::compile)
                    .collect::<Result<Vec<_>>>()?;
                let d = components[0].dim();
                for c in &components {
                    check_dim(d, c.dim())?;
                }
                Measure::Mixture {
                    components,
                    weights: weights.clone(),
                }
            }
            MeasureSpec::Pushforward { base, map } => {
                let base = Measure::compile(base)?;
                map.validate(base.dim())?;
                Measure::Pushforward {
                    base: Box::new(base),
                    map: map.clone(),
                }
            }
            MeasureSpec::Empirical {
                points,
                weights,
                path,
            } => {
                let points = match (points, path) {
                    (Some(p), _) => p.clone(),
                    (None, Some(path)) => {
                        return Err(Error::InvalidParameter(format!(
                            "empirical points file {path} must be loaded before compiling"
                        )))
                    }
                    (None, None) => {
                        return Err(Error::InvalidParameter(
                            "empirical measure needs points".into(),
                        ))
                    }
                };
                Measure::empirical(points, weights.clone())?
            }
            MeasureSpec::UnnormalizedScore {
                density,
                dim,
                log_scale,
            } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter("dimension must be positive".into()));
                }
                match density.as_str() {
                    "quartic" => {
                        Measure::Unnormalized(UnnormalizedDensity::quartic(*dim, *log_scale))
                    }
                    other => {
                        return Err(Error::Unsupported(format!(
                            "unknown unnormalized density '{other}'; built-in: quartic"
                        )))
                    }
                }
            }
        })
    }

    pub fn empirical(points: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Measure> {
        if points.is_empty() {
            return Err(Error::InvalidParameter(
                "empirical measure needs at least one point".into(),
            ));
        }
        let d = points[0].len();
        if d == 0 {
            return Err(Error::InvalidParameter(
                "empirical points must be non-empty".into(),
            ));
        }
        for p in &points {
            check_dim(d, p.len())?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(
                    "empirical points must be finite".into(),
                ));
            }
        }
        let weights = match weights {
            Some(w) => {
                check_dim(points.len(), w.len())?;
                check_weights(&w, "empirical")?;
                w
            }
            None => vec![1.0 / points.len() as f64; points.len()],
        };
        Ok(Measure::Empirical { points, weights })
    }

    pub fn family(&self) -> &'static str {
        match self {
            Measure::UniformBox { .. } => "uniform_box",
            Measure::Gaussian(_) => "gaussian",
            Measure::Sphere { .. } => "sphere_uniform",
            Measure::Mixture { .. } => "mixture",
            Measure::Pushforward { .. } => "pushforward",
            Measure::Empirical { .. } => "empirical",
            Measure::Unnormalized(_) => "unnormalized_score",
        }
    }

    /// Ambient dimension of the points.
    pub fn dim(&self) -> usize {
        match self {
            Measure::UniformBox { a, .. } => a.len(),
            Measure::Gaussian(g) => g.dim(),
            Measure::Sphere { dim } => dim + 1,
            Measure::Mixture { components, .. } => components[0].dim(),
            Measure::Pushforward { base, .. } => base.dim(),
            Measure::Empirical { points, .. } => points[0].len(),
            Measure::Unnormalized(u) => u.dim,
        }
    }

    /// Lebesgue density.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        match self {
            Measure::UniformBox { a, b } => {
                let inside = x
                    .iter()
                    .zip(a.iter().zip(b))
                    .all(|(v, (lo, hi))| v >= lo && v <= hi);
                Ok(if inside {
                    a.iter().zip(b).map(|(lo, hi)| 1.0 / (hi - lo)).product()
                } else {
                    0.0
                })
            }
            Measure::Gaussian(g) => Ok(g.log_density(x).exp()),
            Measure::Mixture {
                components,
                weights,
            } => {
                let mut acc = 0.0;
                for (c, w) in components.iter().zip(weights) {
                    acc += w * c.density(x)?;
                }
                Ok(acc)
            }
            other => Err(Error::Unsupported(format!(
                "{} has no Lebesgue density here",
                other.family()
            ))),
        }
    }

    fn log_density(&self, x: &[f64]) -> Result<f64> {
        match self {
            Measure::Gaussian(g) => Ok(g.log_density(x)),
            other => Ok(other.density(x)?.ln()),
        }
    }

    /// Score `∇ log p(x)`.
    pub fn score(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        match self {
            Measure::Gaussian(g) => Ok(g.score(x)),
            Measure::Unnormalized(u) => Ok((u.score)(x)),
            Measure::Mixture {
                components,
                weights,
            } => {
                // Responsibilities via log-sum-exp so far tails do not underflow.
                let logs = components
                    .iter()
                    .zip(weights)
                    .map(|(c, w)| Ok(w.ln() + c.log_density(x)?))
                    .collect::<Result<Vec<f64>>>()?;
                let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let total: f64 = logs.iter().map(|l| (l - top).exp()).sum();
                let mut out = vec![0.0; x.len()];
                for (c, l) in components.iter().zip(&logs) {
                    let r = (l - top).exp() / total;
                    if r == 0.0 {
                        continue;
                    }
                    for (o, s) in out.iter_mut().zip(c.score(x)?) {
                        *o += r * s;
                    }
                }
                Ok(out)
            }
            other => Err(Error::Unsupported(format!(
                "{} has no differentiable density",
                other.family()
            ))),
        }
    }

    /// A sampler drawing from this measure with the given generator.
    pub fn sampler(&self, rng: StreamRng) -> Result<Box<dyn Sampler + '_>> {
        Ok(match self {
            Measure::UniformBox { a, b } => Box::new(UniformSampler { a, b, rng }),
            Measure::Gaussian(g) => Box::new(GaussianSampler {
                g,
                z: vec![0.0; g.dim()],
                rng,
            }),
            Measure::Sphere { dim } => Box::new(SphereSampler { n: dim + 1, rng }),
            Measure::Mixture {
                components,
                weights,
            } => {
                let subs = components
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c.sampler(rng.fork(j as u64)))
                    .collect::<Result<Vec<_>>>()?;
                Box::new(MixtureSampler { weights, subs, rng })
            }
            Measure::Pushforward { base, map } => Box::new(PushforwardSampler {
                base: base.sampler(rng)?,
                map,
                buf: vec![0.0; base.dim()],
            }),
            Measure::Empirical { points, weights } => Box::new(EmpiricalSampler {
                points,
                weights,
                rng,
            }),
            Measure::Unnormalized(u) => {
                return Err(Error::NotSampleable(format!(
                    "'{}' is only known up to normalisation; use a Stein kernel",
                    u.name
                )))
            }
        })
    }

    /// `n` points drawn with stream 0 of `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let mut s = self.sampler(StreamRng::new(seed, 0))?;
        let d = self.dim();
        Ok((0..n)
            .map(|_| {
                let mut p = vec![0.0; d];
                s.next_into(&mut p);
                p
            })
            .collect())
    }

    /// Support endpoints of a one-dimensional measure (possibly infinite).
    pub fn endpoints_1d(&self) -> Vec<f64> {
        match self {
            Measure::UniformBox { a, b } if a.len() == 1 => vec![a[0], b[0]],
            Measure::Mixture { components, .. } => {
                components.iter().flat_map(|c| c.endpoints_1d()).collect()
            }
            Measure::Pushforward { base, map } => base
                .endpoints_1d()
                .into_iter()
                .map(|e| map.forward_coord(0, e))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// The marginal on coordinates `dims` when the measure factorises across
    /// `dims` and the remaining coordinates.
    pub fn marginal(&self, dims: &[usize]) -> Option<Measure> {
        match self {
            Measure::UniformBox { a, b } => Some(Measure::UniformBox {
                a: dims.iter().map(|&i| a[i]).collect(),
                b: dims.iter().map(|&i| b[i]).collect(),
            }),
            Measure::Gaussian(g) => {
                let d = g.dim();
                let inside = |i: usize| dims.contains(&i);
                if (0..d).any(|i| (0..d).any(|j| inside(i) != inside(j) && g.cov[(i, j)] != 0.0)) {
                    return None;
                }
                let cov =
                    DMatrix::from_fn(dims.len(), dims.len(), |i, j| g.cov[(dims[i], dims[j])]);
                GaussianMeasure::new(dims.iter().map(|&i| g.mean[i]).collect(), cov)
                    .ok()
                    .map(Measure::Gaussian)
            }
            _ => None,
        }
    }
}

/// Streaming draws from a measure.
pub trait Sampler {
    fn next_into(&mut self, out: &mut [f64]);
}

struct UniformSampler<'a> {
    a: &'a [f64],
    b: &'a [f64],
    rng: StreamRng,
}

impl Sampler for UniformSampler<'_> {
    fn next_into(&mut self, out: &mut [f64]) {
        for (o, (lo, hi)) in out.iter_mut().zip(self.a.iter().zip(self.b)) {
            *o = lo + (hi - lo) * self.rng.uniform();
        }
    }
}

struct GaussianSampler<'a> {
    g: &'a GaussianMeasure,
    z: Vec<f64>,
    rng: StreamRng,
}

impl Sampler for GaussianSampler<'_> {
    fn next_into(&mut self, out: &mut [f64]) {
        for z in self.z.iter_mut() {
            *z = self.rng.normal();
        }
        let d = self.z.len();
        for i in 0..d {
            let mut v = self.g.mean[i];
            for j in 0..=i {
                v += self.g.chol[(i, j)] * self.z[j];
            }
            out[i] = v;
        }
    }
}

struct SphereSampler {
    n: usize,
    rng: StreamRng,
}

impl Sampler for SphereSampler {
    fn next_into(&mut self, out: &mut [f64]) {
        loop {
            for o in out[..self.n].iter_mut() {
                *o = self.rng.normal();
            }
            let norm = out[..self.n].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-300 {
                out[..self.n].iter_mut().for_each(|v| *v /= norm);
                return;
            }
        }
    }
}

struct MixtureSampler<'a> {
    weights: &'a [f64],
    subs: Vec<Box<dyn Sampler + 'a>>,
    rng: StreamRng,
}

impl Sampler for MixtureSampler<'_> {
    fn next_into(&mut self, out: &mut [f64]) {
        let j = self.rng.categorical(self.weights);
        self.subs[j].next_into(out);
    }
}

struct PushforwardSampler<'a> {
    base: Box<dyn Sampler + 'a>,
    map: &'a Transform,
    buf: Vec<f64>,
}

impl Sampler for PushforwardSampler<'_> {
    fn next_into(&mut self, out: &mut [f64]) {
        self.base.next_into(&mut self.buf);
        self.map.forward_into(&self.buf, out);
    }
}

struct EmpiricalSampler<'a> {
    points: &'a [Vec<f64>],
    weights: &'a [f64],
    rng: StreamRng,
}

impl Sampler for EmpiricalSampler<'_> {
    fn next_into(&mut self, out: &mut [f64]) {
        let j = self.rng.categorical(self.weights);
        out.copy_from_slice(&self.points[j]);
    }
}
