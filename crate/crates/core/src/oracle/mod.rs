//! Independent numerical estimates of `K_P` and `K_PP`.
//!
//! Deterministic rules are used where the measure allows it:
//!
//! * uniform boxes in one or two dimensions: Gauss–Legendre, split at the
//!   kernel's breakpoints (with a graded substitution when the kernel has
//!   singular derivatives there);
//! * Gaussians in one or two dimensions: Gauss–Hermite for smooth
//!   integrands, or composite Gauss–Legendre over `μ ± 40σ` when the
//!   integrand has breakpoints;
//! * mixtures and pushforwards of those, component by component;
//! * empirical measures: the exact weighted sum.
//!
//! Everything else falls back to Monte Carlo. `K_P` uses plain sample means
//! and `K_PP` the U-statistic over distinct pairs with a jackknife standard
//! error. Monte Carlo work is split into chunks of `2^16` draws, chunk `c`
//! using stream `c` of the seed, and the chunk summaries are merged in chunk
//! order, so results do not depend on the number of threads.

pub mod rules;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::kernels::Kernel;
use crate::measures::Measure;
use crate::rng::StreamRng;
use crate::specfun::normal_pdf;

const CHUNK: usize = 1 << 16;
/// Node cap per axis for nested two-dimensional `K_PP` rules.
const NESTED_2D_NODES: usize = 48;
/// Gauss–Legendre nodes per panel for Gaussians with breakpoints.
const PANEL_NODES: usize = 24;
/// Half-width, in standard deviations, of the truncated Gaussian range.
const GAUSS_RANGE: f64 = 40.0;
/// Smallest panel rule for split two-dimensional boxes.
const MIN_PANEL_NODES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Quadrature nodes per axis (per panel for split rules).
    pub nodes: usize,
    /// Monte Carlo samples for `K_P`, or distinct pairs for `K_PP`.
    pub samples: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            nodes: 200,
            samples: 1_000_000,
        }
    }
}

impl Budget {
    pub fn new(nodes: usize, samples: usize) -> Self {
        Budget { nodes, samples }
    }

    fn validate(&self) -> Result<()> {
        if self.nodes < 10 || self.samples < 10 {
            return Err(Error::InvalidParameter(format!(
                "oracle budget must be at least 10, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GaussLegendre,
    GaussHermite,
    MonteCarlo,
    SphereMc,
    Exact,
}

impl Method {
    pub fn is_deterministic(self) -> bool {
        !matches!(self, Method::MonteCarlo | Method::SphereMc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub value: f64,
    /// Zero for deterministic rules.
    pub stderr: f64,
    pub method: Method,
    /// Number of integrand evaluations.
    pub n: usize,
    /// Seed used, for Monte Carlo estimates.
    pub seed: Option<u64>,
}

/// A probability-weighted node set.
struct NodeRule {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    method: Method,
}

impl NodeRule {
    fn apply(&self, f: &(dyn Fn(&[f64]) -> Result<f64> + Sync)) -> Result<f64> {
        let values = self
            .points
            .par_iter()
            .map(|p| f(p))
            .collect::<Result<Vec<f64>>>()?;
        Ok(values.iter().zip(&self.weights).map(|(v, w)| v * w).sum())
    }
}

/// Panel breakpoints for `[lo, hi]` split at `kinks`, duplicates removed.
fn breakpoints(lo: f64, hi: f64, kinks: &[f64]) -> Vec<f64> {
    let tol = 1e-12 * (hi - lo);
    let mut pts: Vec<f64> = kinks
        .iter()
        .copied()
        .filter(|k| *k > lo + tol && *k < hi - tol)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    pts.dedup_by(|b, a| (*b - *a).abs() <= tol);
    pts
}

/// One-dimensional composite Gauss–Legendre points and (Lebesgue) weights.
///
/// With `graded`, each panel uses `s(u) = u³(10 − 15u + 6u²)`, whose
/// derivative vanishes to second order at both ends and tames power-type
/// singularities at the breakpoints.
fn composite_1d(edges: &[f64], n: usize, graded: bool) -> (Vec<f64>, Vec<f64>) {
    let rule = rules::gauss_legendre(n);
    let mut xs = Vec::with_capacity(n * (edges.len() - 1));
    let mut ws = Vec::with_capacity(n * (edges.len() - 1));
    for pair in edges.windows(2) {
        let (p, q) = (pair[0], pair[1]);
        let h = q - p;
        for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
            let u = 0.5 * (z + 1.0);
            if graded {
                let s = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
                let ds = 30.0 * u * u * (1.0 - u) * (1.0 - u);
                xs.push(p + h * s);
                ws.push(0.5 * w * h * ds);
            } else {
                xs.push(p + h * u);
                ws.push(0.5 * w * h);
            }
        }
    }
    (xs, ws)
}

fn axis(kinks: &[Vec<f64>], i: usize) -> &[f64] {
    kinks.get(i).map_or(&[], |k| k)
}

/// Deterministic rule for `measure`, or `None` when Monte Carlo is needed.
///
/// `kinks` holds breakpoints per axis; only the first entry matters for
/// one-dimensional measures.
fn node_rule(
    measure: &Measure,
    kinks: &[Vec<f64>],
    singular: bool,
    nodes_1d: usize,
    nodes_2d: usize,
) -> Option<NodeRule> {
    match measure {
        Measure::UniformBox { a, b } if a.len() == 1 => {
            let edges = breakpoints(a[0], b[0], axis(kinks, 0));
            let (xs, ws) = composite_1d(&edges, nodes_1d, singular);
            let r = b[0] - a[0];
            Some(NodeRule {
                points: xs.into_iter().map(|x| vec![x]).collect(),
                weights: ws.into_iter().map(|w| w / r).collect(),
                method: Method::GaussLegendre,
            })
        }
        Measure::UniformBox { a, b } if a.len() == 2 => {
            // Split panels share the per-axis node budget.
            let side = |k: usize| {
                let edges = breakpoints(a[k], b[k], axis(kinks, k));
                let per_panel = nodes_2d.div_ceil(edges.len() - 1).max(MIN_PANEL_NODES);
                composite_1d(&edges, per_panel, singular)
            };
            let ((x0, w0), (x1, w1)) = (side(0), side(1));
            let area = (b[0] - a[0]) * (b[1] - a[1]);
            let mut points = Vec::with_capacity(x0.len() * x1.len());
            let mut weights = Vec::with_capacity(x0.len() * x1.len());
            for (&xi, &wi) in x0.iter().zip(&w0) {
                for (&xj, &wj) in x1.iter().zip(&w1) {
                    points.push(vec![xi, xj]);
                    weights.push(wi * wj / area);
                }
            }
            Some(NodeRule {
                points,
                weights,
                method: Method::GaussLegendre,
            })
        }
        Measure::Gaussian(g) if g.dim() == 1 => {
            let (mu, sigma) = (g.mean[0], g.chol[(0, 0)]);
            if axis(kinks, 0).is_empty() {
                let rule = rules::gauss_hermite(nodes_1d);
                let c = std::f64::consts::PI.sqrt();
                Some(NodeRule {
                    points: rule
                        .nodes
                        .iter()
                        .map(|z| vec![mu + std::f64::consts::SQRT_2 * sigma * z])
                        .collect(),
                    weights: rule.weights.iter().map(|w| w / c).collect(),
                    method: Method::GaussHermite,
                })
            } else {
                let n_panels = (2.0 * GAUSS_RANGE) as i64;
                let mut cuts: Vec<f64> = (0..n_panels)
                    .map(|k| mu + sigma * (k as f64 - GAUSS_RANGE + 1.0))
                    .collect();
                cuts.extend_from_slice(axis(kinks, 0));
                let edges = breakpoints(mu - GAUSS_RANGE * sigma, mu + GAUSS_RANGE * sigma, &cuts);
                let (xs, ws) = composite_1d(&edges, PANEL_NODES, singular);
                let weights = xs
                    .iter()
                    .zip(ws)
                    .map(|(x, w)| w * normal_pdf((x - mu) / sigma) / sigma)
                    .collect();
                Some(NodeRule {
                    points: xs.into_iter().map(|x| vec![x]).collect(),
                    weights,
                    method: Method::GaussLegendre,
                })
            }
        }
        Measure::Gaussian(g) if g.dim() == 2 => {
            let rule = rules::gauss_hermite(nodes_2d);
            let l = &g.chol;
            let mut points = Vec::with_capacity(nodes_2d * nodes_2d);
            let mut weights = Vec::with_capacity(nodes_2d * nodes_2d);
            for (&zi, &wi) in rule.nodes.iter().zip(&rule.weights) {
                for (&zj, &wj) in rule.nodes.iter().zip(&rule.weights) {
                    let (u, v) = (std::f64::consts::SQRT_2 * zi, std::f64::consts::SQRT_2 * zj);
                    points.push(vec![
                        g.mean[0] + l[(0, 0)] * u,
                        g.mean[1] + l[(1, 0)] * u + l[(1, 1)] * v,
                    ]);
                    weights.push(wi * wj / std::f64::consts::PI);
                }
            }
            Some(NodeRule {
                points,
                weights,
                method: Method::GaussHermite,
            })
        }
        Measure::Mixture {
            components,
            weights,
        } => {
            let mut out = NodeRule {
                points: Vec::new(),
                weights: Vec::new(),
                method: Method::Exact,
            };
            for (c, w) in components.iter().zip(weights) {
                let sub = node_rule(c, kinks, singular, nodes_1d, nodes_2d)?;
                out.method = sub.method;
                out.points.extend(sub.points);
                out.weights.extend(sub.weights.into_iter().map(|v| v * w));
            }
            Some(out)
        }
        Measure::Pushforward { base, map } => {
            let base_kinks: Vec<Vec<f64>> = kinks
                .iter()
                .enumerate()
                .map(|(i, ks)| {
                    ks.iter()
                        .map(|&k| map.inverse_coord(i, k))
                        .filter(|k| k.is_finite())
                        .collect()
                })
                .collect();
            let sub = node_rule(base, &base_kinks, singular, nodes_1d, nodes_2d)?;
            Some(NodeRule {
                points: sub.points.iter().map(|p| map.forward(p)).collect(),
                weights: sub.weights,
                method: sub.method,
            })
        }
        Measure::Empirical { points, weights } => Some(NodeRule {
            points: points.clone(),
            weights: weights.clone(),
            method: Method::Exact,
        }),
        _ => None,
    }
}

#[derive(Default, Clone, Copy)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64,
        }
    }
}

fn mc_method(measure: &Measure) -> Method {
    match measure {
        Measure::Sphere { .. } => Method::SphereMc,
        Measure::Pushforward { base, .. } => mc_method(base),
        _ => Method::MonteCarlo,
    }
}

fn monte_carlo(
    measure: &Measure,
    f: &(dyn Fn(&[f64]) -> Result<f64> + Sync),
    samples: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    // Surface "not sampleable" before spawning work.
    measure.sampler(StreamRng::new(seed, 0))?;
    let d = measure.dim();
    let chunks = samples.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = measure.sampler(StreamRng::new(seed, c as u64))?;
            let count = CHUNK.min(samples - c * CHUNK);
            let mut m = Moments::default();
            let mut p = vec![0.0; d];
            for _ in 0..count {
                s.next_into(&mut p);
                m.push(f(&p)?);
            }
            Ok(m)
        })
        .collect::<Result<Vec<Moments>>>()?;
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = if m.n > 1 {
        m.m2 / (m.n - 1) as f64
    } else {
        0.0
    };
    Ok(OracleEstimate {
        value: m.mean,
        stderr: (var / m.n as f64).sqrt(),
        method: mc_method(measure),
        n: m.n,
        seed: Some(seed),
    })
}

/// `∫ f dP` with breakpoints `kinks` (one-dimensional measures only).
pub fn integrate(
    measure: &Measure,
    f: &(dyn Fn(&[f64]) -> Result<f64> + Sync),
    kinks: &[f64],
    singular: bool,
    budget: Budget,
    seed: u64,
) -> Result<OracleEstimate> {
    budget.validate()?;
    match node_rule(
        measure,
        &[kinks.to_vec()],
        singular,
        budget.nodes,
        budget.nodes,
    ) {
        Some(rule) => Ok(OracleEstimate {
            value: rule.apply(f)?,
            stderr: 0.0,
            method: rule.method,
            n: rule.points.len(),
            seed: None,
        }),
        None => monte_carlo(measure, f, budget.samples, seed),
    }
}

fn kinks_for(kernel: &Kernel, measure: &Measure, x: &[f64]) -> Vec<Vec<f64>> {
    if measure.dim() == 1 {
        vec![kernel.kinks_at(x[0])]
    } else {
        (0..measure.dim())
            .map(|i| kernel.axis_kinks(x, i))
            .collect()
    }
}

fn outer_kinks_for(kernel: &Kernel, measure: &Measure) -> Vec<Vec<f64>> {
    match measure {
        Measure::UniformBox { a, b } if a.len() > 1 => (0..a.len())
            .map(|i| kernel.axis_outer_kinks(a[i], b[i], i))
            .collect(),
        _ if measure.dim() == 1 => vec![kernel.outer_kinks(&measure.endpoints_1d())],
        _ => Vec::new(),
    }
}

/// Estimate of `K_P(x)`.
pub fn estimate_kp(
    kernel: &Kernel,
    measure: &Measure,
    x: &[f64],
    budget: Budget,
    seed: u64,
) -> Result<OracleEstimate> {
    check_dim(measure.dim(), x.len())?;
    budget.validate()?;
    let kinks = kinks_for(kernel, measure, x);
    let f = |y: &[f64]| kernel.eval(x, y);
    match node_rule(
        measure,
        &kinks,
        kernel.has_singular_kinks(),
        budget.nodes,
        budget.nodes,
    ) {
        Some(rule) => Ok(OracleEstimate {
            value: rule.apply(&f)?,
            stderr: 0.0,
            method: rule.method,
            n: rule.points.len(),
            seed: None,
        }),
        None => monte_carlo(measure, &f, budget.samples, seed),
    }
}

/// Number of samples whose distinct unordered pairs cover `pairs`.
pub fn samples_for_pairs(pairs: usize) -> usize {
    let m = ((1.0 + (1.0 + 8.0 * pairs as f64).sqrt()) / 2.0).ceil() as usize;
    m.max(3)
}

/// Estimate of `K_PP`.
///
/// Deterministic measures use nested rules (capped at 48 nodes per axis in
/// two dimensions). Otherwise the U-statistic over `m` samples with
/// `m(m-1)/2 >= budget.samples` is returned with a jackknife standard error.
pub fn estimate_kpp(
    kernel: &Kernel,
    measure: &Measure,
    budget: Budget,
    seed: u64,
) -> Result<OracleEstimate> {
    budget.validate()?;
    if let Some(d) = kernel.dim() {
        check_dim(d, measure.dim())?;
    }
    let singular = kernel.has_singular_kinks();
    let outer_kinks = outer_kinks_for(kernel, measure);
    let nodes_2d = budget.nodes.min(NESTED_2D_NODES);
    if let Some(outer) = node_rule(measure, &outer_kinks, singular, budget.nodes, nodes_2d) {
        let parts = outer
            .points
            .par_iter()
            .map(|x| {
                let kinks = kinks_for(kernel, measure, x);
                let inner = node_rule(measure, &kinks, singular, budget.nodes, nodes_2d)
                    .expect("inner rule exists whenever the outer one does");
                Ok((inner.apply(&|y| kernel.eval(x, y))?, inner.points.len()))
            })
            .collect::<Result<Vec<(f64, usize)>>>()?;
        let value = parts
            .iter()
            .zip(&outer.weights)
            .map(|((v, _), w)| v * w)
            .sum();
        return Ok(OracleEstimate {
            value,
            stderr: 0.0,
            method: outer.method,
            n: parts.iter().map(|(_, n)| n).sum(),
            seed: None,
        });
    }
    u_statistic(kernel, measure, samples_for_pairs(budget.samples), seed)
}

/// `(1/(m(m-1))) Σ_{i≠j} K(x_i, x_j)` with its jackknife standard error.
pub fn u_statistic(
    kernel: &Kernel,
    measure: &Measure,
    m: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    if m < 3 {
        return Err(Error::InvalidParameter(
            "U-statistic needs at least 3 samples".into(),
        ));
    }
    let xs = measure.sample(m, seed)?;
    // Row sums over j ≠ i.
    let rows = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut r = 0.0;
            for j in 0..m {
                if j != i {
                    r += kernel.eval(&xs[i], &xs[j])?;
                }
            }
            Ok(r)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mf = m as f64;
    let s: f64 = rows.iter().sum();
    let u = s / (mf * (mf - 1.0));
    let loo: Vec<f64> = rows
        .iter()
        .map(|r| (s - 2.0 * r) / ((mf - 1.0) * (mf - 2.0)))
        .collect();
    let mean_loo = loo.iter().sum::<f64>() / mf;
    let var = (mf - 1.0) / mf
        * loo
            .iter()
            .map(|v| (v - mean_loo) * (v - mean_loo))
            .sum::<f64>();
    Ok(OracleEstimate {
        value: u,
        stderr: var.sqrt(),
        method: mc_method(measure),
        n: m * (m - 1),
        seed: Some(seed),
    })
}
