//! Pointwise kernel evaluation.

mod gaussian;
pub mod matern;
mod spec;

use std::collections::BTreeMap;

use nalgebra::DMatrix;

pub use gaussian::GaussianKernel;
pub(crate) use gaussian::{checked_cholesky, matrix_from_rows};
pub use spec::{KernelSpec, PowerTerm, ProductFactor};

use crate::error::{check_dim, Error, Result};
use crate::measures::Measure;
use crate::specfun::{bernoulli_coefficients, factorial};
use crate::stein::SteinKernel;
use crate::transform::Transform;

const SPHERE_TOL: f64 = 1e-9;

/// A validated, ready-to-evaluate kernel.
#[derive(Debug, Clone)]
pub enum Kernel {
    Gaussian(GaussianKernel),
    Matern {
        n: u32,
        lengthscale: f64,
    },
    Wendland {
        order: u32,
        lengthscale: f64,
    },
    Fbm {
        hurst: f64,
        a: f64,
        b: f64,
    },
    /// Coefficients keyed by multi-index, iterated in lexicographic order.
    PowerSeries {
        terms: BTreeMap<Vec<u32>, f64>,
        dim: usize,
    },
    SphereSobolev32,
    SphereSmooth,
    /// `coeffs` are the monomial coefficients of the scaled Bernoulli
    /// polynomial, lowest power first.
    PeriodicSobolev {
        r: u32,
        coeffs: Vec<f64>,
    },
    Stein(SteinKernel),
    Sum {
        children: Vec<Kernel>,
        weights: Vec<f64>,
    },
    Product {
        factors: Vec<(Kernel, Vec<usize>)>,
    },
    MatrixValued {
        base: Box<Kernel>,
        matrix: DMatrix<f64>,
    },
    Composed {
        base: Box<Kernel>,
        map: Transform,
    },
}

fn positive(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} must be positive and finite, got {v}"
        )))
    }
}

impl Kernel {
    /// Validates a spec. Stein kernels take their score from `measure`.
    pub fn compile(spec: &KernelSpec, measure: Option<&Measure>) -> Result<Kernel> {
        Ok(match spec {
            KernelSpec::Gaussian {
                lengthscales,
                lengthscale_matrix,
            } => match (lengthscales, lengthscale_matrix) {
                (Some(ls), None) => Kernel::Gaussian(GaussianKernel::diagonal(ls.clone())?),
                (None, Some(m)) => Kernel::Gaussian(GaussianKernel::full(matrix_from_rows(
                    m,
                    "lengthscale_matrix",
                )?)?),
                _ => {
                    return Err(Error::InvalidParameter(
                        "gaussian kernel needs exactly one of lengthscales, lengthscale_matrix"
                            .into(),
                    ))
                }
            },
            KernelSpec::Matern { nu, lengthscale } => {
                let n = nu - 0.5;
                if !(n.fract() == 0.0 && (0.0..=3.0).contains(&n)) {
                    return Err(Error::Unsupported(format!(
                        "Matérn order nu = {nu}; only 0.5, 1.5, 2.5 and 3.5 are available"
                    )));
                }
                Kernel::Matern {
                    n: n as u32,
                    lengthscale: positive(*lengthscale, "lengthscale")?,
                }
            }
            KernelSpec::Wendland { order, lengthscale } => {
                if ![0, 2, 4].contains(order) {
                    return Err(Error::Unsupported(format!(
                        "Wendland order {order}; use 0, 2 or 4"
                    )));
                }
                Kernel::Wendland {
                    order: *order,
                    lengthscale: positive(*lengthscale, "lengthscale")?,
                }
            }
            KernelSpec::Fbm {
                hurst,
                domain: [a, b],
            } => {
                if !(*hurst > 0.0 && *hurst < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Hurst index must be in (0, 1), got {hurst}"
                    )));
                }
                if !(a.is_finite() && b.is_finite() && *a >= 0.0 && b > a) {
                    return Err(Error::InvalidParameter(format!(
                        "fbm domain must satisfy 0 <= a < b, got [{a}, {b}]"
                    )));
                }
                Kernel::Fbm {
                    hurst: *hurst,
                    a: *a,
                    b: *b,
                }
            }
            KernelSpec::PowerSeries { terms } => {
                let dim = terms.first().map_or(0, |t| t.alpha.len());
                if dim == 0 {
                    return Err(Error::InvalidParameter(
                        "power series needs at least one term".into(),
                    ));
                }
                let mut map = BTreeMap::new();
                for t in terms {
                    check_dim(dim, t.alpha.len())?;
                    if !(t.coefficient.is_finite() && t.coefficient >= 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "power series coefficients must be non-negative, got {} for {:?}",
                            t.coefficient, t.alpha
                        )));
                    }
                    if map.insert(t.alpha.clone(), t.coefficient).is_some() {
                        return Err(Error::InvalidParameter(format!(
                            "repeated multi-index {:?}",
                            t.alpha
                        )));
                    }
                }
                Kernel::PowerSeries { terms: map, dim }
            }
            KernelSpec::SphereSobolev32 => Kernel::SphereSobolev32,
            KernelSpec::SphereSmooth => Kernel::SphereSmooth,
            KernelSpec::PeriodicSobolev { r } => {
                if !(1..=6).contains(r) {
                    return Err(Error::Unsupported(format!(
                        "periodic Sobolev r = {r}; use 1..=6"
                    )));
                }
                let scale = if r % 2 == 1 { 1.0 } else { -1.0 }
                    * std::f64::consts::TAU.powi(2 * *r as i32)
                    / factorial(2 * r);
                let coeffs = bernoulli_coefficients(2 * r)?
                    .into_iter()
                    .map(|(num, den)| scale * num as f64 / den as f64)
                    .collect();
                Kernel::PeriodicSobolev { r: *r, coeffs }
            }
            KernelSpec::Stein { base, offset } => {
                let measure = measure.ok_or_else(|| {
                    Error::InvalidParameter(
                        "a stein kernel needs a measure to take the score from".into(),
                    )
                })?;
                let base = Kernel::compile(base, Some(measure))?;
                Kernel::Stein(SteinKernel::from_kernel(&base, measure, *offset)?)
            }
            KernelSpec::Sum { children, weights } => {
                if children.is_empty() || children.len() != weights.len() {
                    return Err(Error::InvalidParameter(
                        "sum kernel needs one weight per child and at least one child".into(),
                    ));
                }
                if weights.iter().any(|w| !w.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "sum kernel weights must be finite".into(),
                    ));
                }
                let children = children
                    .iter()
                    .map(|c| Kernel::compile(c, measure))
                    .collect::<Result<Vec<_>>>()?;
                let dims: Vec<usize> = children.iter().filter_map(|c| c.dim()).collect();
                if dims.windows(2).any(|w| w[0] != w[1]) {
                    return Err(Error::InvalidParameter(format!(
                        "sum kernel children disagree on dimension: {dims:?}"
                    )));
                }
                Kernel::Sum {
                    children,
                    weights: weights.clone(),
                }
            }
            KernelSpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidParameter(
                        "product kernel needs at least one factor".into(),
                    ));
                }
                let mut seen: Vec<usize> = factors
                    .iter()
                    .flat_map(|f| f.dims.iter().copied())
                    .collect();
                seen.sort_unstable();
                if seen.iter().enumerate().any(|(i, &d)| i != d) {
                    return Err(Error::InvalidParameter(format!(
                        "product factor dims must partition 0..d without overlap, got {seen:?}"
                    )));
                }
                let compiled = factors
                    .iter()
                    .map(|f| {
                        let k = Kernel::compile(&f.kernel, None)?;
                        if f.dims.is_empty() {
                            return Err(Error::InvalidParameter("empty product factor".into()));
                        }
                        if let Some(d) = k.dim() {
                            check_dim(d, f.dims.len())?;
                        }
                        Ok((k, f.dims.clone()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Kernel::Product { factors: compiled }
            }
            KernelSpec::MatrixValued { base, matrix } => {
                let b = matrix_from_rows(matrix, "matrix")?;
                check_psd(&b)?;
                Kernel::MatrixValued {
                    base: Box::new(Kernel::compile(base, measure)?),
                    matrix: b,
                }
            }
            KernelSpec::Composed { base, map } => {
                let base = Kernel::compile(base, None)?;
                map.validate(base.dim().unwrap_or(1))?;
                Kernel::Composed {
                    base: Box::new(base),
                    map: map.clone(),
                }
            }
        })
    }

    /// Short family name used in pair identifiers.
    pub fn family(&self) -> &'static str {
        match self {
            Kernel::Gaussian(_) => "gaussian",
            Kernel::Matern { .. } => "matern",
            Kernel::Wendland { .. } => "wendland",
            Kernel::Fbm { .. } => "fbm",
            Kernel::PowerSeries { .. } => "power_series",
            Kernel::SphereSobolev32 => "sphere_sobolev32",
            Kernel::SphereSmooth => "sphere_smooth",
            Kernel::PeriodicSobolev { .. } => "periodic_sobolev",
            Kernel::Stein(_) => "stein",
            Kernel::Sum { .. } => "sum",
            Kernel::Product { .. } => "product",
            Kernel::MatrixValued { .. } => "matrix_valued",
            Kernel::Composed { .. } => "composed",
        }
    }

    /// Input dimension when the family fixes it.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Kernel::Gaussian(g) => Some(g.dim()),
            Kernel::Fbm { .. } => Some(1),
            Kernel::PowerSeries { dim, .. } => Some(*dim),
            Kernel::Stein(s) => Some(s.dim()),
            Kernel::Sum { children, .. } => children.iter().find_map(|c| c.dim()),
            Kernel::Product { factors } => Some(factors.iter().map(|(_, d)| d.len()).sum()),
            Kernel::MatrixValued { base, .. } | Kernel::Composed { base, .. } => base.dim(),
            _ => None,
        }
    }

    pub fn is_matrix_valued(&self) -> bool {
        matches!(self, Kernel::MatrixValued { .. })
    }

    /// Scalar kernel value `K(x, y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(x.len(), y.len())?;
        if let Some(d) = self.dim() {
            check_dim(d, x.len())?;
        }
        if x.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        match self {
            Kernel::Gaussian(g) => Ok(g.eval_unchecked(x, y)),
            Kernel::Matern { n, lengthscale } => {
                Ok(matern::matern_special(*n, distance(x, y) / lengthscale))
            }
            Kernel::Wendland { order, lengthscale } => {
                Ok(wendland(*order, distance(x, y) / lengthscale))
            }
            Kernel::Fbm { hurst, a, b } => {
                let (x, y) = (x[0], y[0]);
                for v in [x, y] {
                    if !(v >= *a && v <= *b) {
                        return Err(Error::OutsideDomain(format!(
                            "{v} is outside the fbm domain [{a}, {b}]"
                        )));
                    }
                }
                let h2 = 2.0 * hurst;
                Ok(0.5 * (x.abs().powf(h2) + y.abs().powf(h2) - (x - y).abs().powf(h2)))
            }
            Kernel::PowerSeries { terms, .. } => Ok(terms
                .iter()
                .map(|(alpha, c)| {
                    c * alpha
                        .iter()
                        .zip(x.iter().zip(y))
                        .map(|(&a, (xi, yi))| (xi * yi).powi(a as i32))
                        .product::<f64>()
                })
                .sum()),
            Kernel::SphereSobolev32 => Ok(2.0 - sphere_distance(x, y)?),
            Kernel::SphereSmooth => Ok(48.0 * (-12.0 * sphere_distance(x, y)?.powi(2)).exp()),
            Kernel::PeriodicSobolev { coeffs, .. } => {
                let t = (periodic_coordinate(x)? - periodic_coordinate(y)?).abs();
                Ok(1.0 + coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c))
            }
            Kernel::Stein(s) => s.eval(x, y),
            Kernel::Sum { children, weights } => {
                let mut acc = 0.0;
                for (k, w) in children.iter().zip(weights) {
                    acc += w * k.eval(x, y)?;
                }
                Ok(acc)
            }
            Kernel::Product { factors } => {
                let mut acc = 1.0;
                for (k, dims) in factors {
                    let xs: Vec<f64> = dims.iter().map(|&i| x[i]).collect();
                    let ys: Vec<f64> = dims.iter().map(|&i| y[i]).collect();
                    acc *= k.eval(&xs, &ys)?;
                }
                Ok(acc)
            }
            Kernel::MatrixValued { .. } => Err(Error::Unsupported(
                "matrix-valued kernel has no scalar value; use eval_matrix".into(),
            )),
            Kernel::Composed { base, map } => {
                map.check_range(x)?;
                map.check_range(y)?;
                base.eval(&map.inverse(x), &map.inverse(y))
            }
        }
    }

    /// `B · K(x, y)` for matrix-valued kernels; a 1×1 matrix otherwise.
    pub fn eval_matrix(&self, x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
        match self {
            Kernel::MatrixValued { base, matrix } => Ok(matrix * base.eval(x, y)?),
            _ => Ok(DMatrix::from_element(1, 1, self.eval(x, y)?)),
        }
    }

    /// Breakpoints in `y` where the one-dimensional section `K(x, ·)` is not smooth.
    pub fn kinks_at(&self, x: f64) -> Vec<f64> {
        match self {
            Kernel::Matern { .. } | Kernel::PeriodicSobolev { .. } => vec![x],
            Kernel::Wendland { lengthscale, .. } => vec![x - lengthscale, x, x + lengthscale],
            Kernel::Fbm { .. } => vec![0.0, x],
            Kernel::Sum { children, .. } => children.iter().flat_map(|c| c.kinks_at(x)).collect(),
            Kernel::Product { factors } => {
                factors.iter().flat_map(|(k, _)| k.kinks_at(x)).collect()
            }
            Kernel::MatrixValued { base, .. } => base.kinks_at(x),
            Kernel::Composed { base, map } => base
                .kinks_at(map.inverse_coord(0, x))
                .into_iter()
                .map(|k| map.forward_coord(0, k))
                .filter(|k| k.is_finite())
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Breakpoints in `y[axis]` of `K(x, ·)`, for kernels that factor across
    /// axes. Empty when the kernel does not split that way.
    pub fn axis_kinks(&self, x: &[f64], axis: usize) -> Vec<f64> {
        match self {
            Kernel::Sum { children, .. } => children
                .iter()
                .flat_map(|c| c.axis_kinks(x, axis))
                .collect(),
            Kernel::Product { factors } => factors
                .iter()
                .filter(|(_, dims)| dims[..] == [axis])
                .flat_map(|(k, _)| k.kinks_at(x[axis]))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Breakpoints in `x[axis]` of `K_P` for a box with sides `[lo, hi]` on that axis.
    pub fn axis_outer_kinks(&self, lo: f64, hi: f64, axis: usize) -> Vec<f64> {
        match self {
            Kernel::Sum { children, .. } => children
                .iter()
                .flat_map(|c| c.axis_outer_kinks(lo, hi, axis))
                .collect(),
            Kernel::Product { factors } => factors
                .iter()
                .filter(|(_, dims)| dims[..] == [axis])
                .flat_map(|(k, _)| k.outer_kinks(&[lo, hi]))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Breakpoints of `x ↦ K_P(x)` for a one-dimensional measure with the
    /// given support endpoints.
    pub fn outer_kinks(&self, endpoints: &[f64]) -> Vec<f64> {
        match self {
            Kernel::Matern { .. } | Kernel::PeriodicSobolev { .. } | Kernel::Wendland { .. } => {
                let offsets = self.kinks_at(0.0);
                endpoints
                    .iter()
                    .flat_map(|e| offsets.iter().map(move |d| e - d))
                    .collect()
            }
            Kernel::Fbm { .. } => vec![0.0],
            Kernel::Sum { children, .. } => children
                .iter()
                .flat_map(|c| c.outer_kinks(endpoints))
                .collect(),
            Kernel::Product { factors } => factors
                .iter()
                .flat_map(|(k, _)| k.outer_kinks(endpoints))
                .collect(),
            Kernel::MatrixValued { base, .. } => base.outer_kinks(endpoints),
            Kernel::Composed { base, map } => {
                let inner: Vec<f64> = endpoints.iter().map(|&e| map.inverse_coord(0, e)).collect();
                base.outer_kinks(&inner)
                    .into_iter()
                    .map(|k| map.forward_coord(0, k))
                    .filter(|k| k.is_finite())
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    /// True when `K(x, ·)` has unbounded derivatives at its breakpoints.
    pub fn has_singular_kinks(&self) -> bool {
        match self {
            Kernel::Fbm { .. } => true,
            Kernel::Sum { children, .. } => children.iter().any(|c| c.has_singular_kinks()),
            Kernel::Product { factors } => factors.iter().any(|(k, _)| k.has_singular_kinks()),
            Kernel::MatrixValued { base, .. } | Kernel::Composed { base, .. } => {
                base.has_singular_kinks()
            }
            _ => false,
        }
    }
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    if x.len() == 1 {
        return (x[0] - y[0]).abs();
    }
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn wendland(order: u32, tau: f64) -> f64 {
    let t = (1.0 - tau).max(0.0);
    match order {
        0 => t,
        2 => t.powi(3) * (3.0 * tau + 1.0),
        _ => t.powi(5) * (8.0 * tau * tau + 5.0 * tau + 1.0),
    }
}

/// Normalises a point that is within `1e-9` of the unit sphere.
pub fn unit_normalize(x: &[f64]) -> Result<Vec<f64>> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > SPHERE_TOL {
        return Err(Error::OffSphere(norm));
    }
    Ok(x.iter().map(|v| v / norm).collect())
}

fn sphere_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(distance(&unit_normalize(x)?, &unit_normalize(y)?))
}

/// The `[0, 1)` coordinate of a periodic input: a scalar in `[0, 1]` or a
/// point on the unit circle, mapped through its angle.
pub fn periodic_coordinate(x: &[f64]) -> Result<f64> {
    match x.len() {
        1 => {
            if !(0.0..=1.0).contains(&x[0]) {
                return Err(Error::OutsideDomain(format!("{} is outside [0, 1]", x[0])));
            }
            Ok(x[0])
        }
        2 => {
            let u = unit_normalize(x)?;
            let t = u[1].atan2(u[0]) / std::f64::consts::TAU;
            Ok(if t < 0.0 { t + 1.0 } else { t })
        }
        d => Err(Error::DimensionMismatch {
            expected: 1,
            got: d,
        }),
    }
}

/// Truncated series `1 + 2 Σ_{k=1}^{n} k^{-2r} cos(2πk(x - y))`.
pub fn periodic_sobolev_series(r: u32, x: f64, y: f64, n_terms: u64) -> Result<f64> {
    if r == 0 || n_terms == 0 {
        return Err(Error::InvalidParameter(format!(
            "periodic Sobolev series needs r >= 1 and n_terms >= 1, got r = {r}, n_terms = {n_terms}"
        )));
    }
    let t = std::f64::consts::TAU * (x - y);
    // Smallest terms first.
    let tail: f64 = (1..=n_terms)
        .rev()
        .map(|k| (k as f64).powi(-2 * r as i32) * (k as f64 * t).cos())
        .sum();
    Ok(1.0 + 2.0 * tail)
}

/// Rejects matrices that are not symmetric positive semi-definite.
pub(crate) fn check_psd(b: &DMatrix<f64>) -> Result<()> {
    if !b.is_square() {
        return Err(Error::InvalidParameter("matrix must be square".into()));
    }
    let scale = b.amax().max(f64::MIN_POSITIVE);
    if (b - b.transpose()).amax() > 1e-12 * scale {
        return Err(Error::InvalidParameter("matrix must be symmetric".into()));
    }
    let min = b.clone().symmetric_eigenvalues().min();
    if min < -1e-12 * scale {
        return Err(Error::InvalidParameter(format!(
            "matrix must be positive semi-definite (min eigenvalue {min:e})"
        )));
    }
    Ok(())
}
