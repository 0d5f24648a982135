//! Langevin Stein kernels.
//!
//! For a base kernel `K` and the score `s = ∇ log p` of a target `P`,
//!
//! ```text
//! K̃(x, y) = K(x, y) s(x)ᵀ s(y) + ∇ₓK(x, y)ᵀ s(y) + ∇ᵧK(x, y)ᵀ s(x) + Tr(∇ₓ∇ᵧK(x, y)) + C
//! ```
//!
//! integrates to `C` against `P` in either argument, so its embeddings are
//! known without integrating anything. Only the score is needed, which is
//! available for densities known up to normalisation.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::kernels::{GaussianKernel, Kernel};
use crate::measures::Measure;

/// A kernel with the first and mixed second derivatives a Stein kernel needs.
///
/// Implementations must be safe to call concurrently.
pub trait DifferentiableKernel: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], y: &[f64]) -> f64;
    /// `∇ₓ K(x, y)`.
    fn grad_x(&self, x: &[f64], y: &[f64]) -> Vec<f64>;
    /// `∇ᵧ K(x, y)`.
    fn grad_y(&self, x: &[f64], y: &[f64]) -> Vec<f64>;
    /// `Tr(∇ₓ∇ᵧ K(x, y)) = Σ_i ∂²K / ∂x_i ∂y_i`.
    fn trace_cross(&self, x: &[f64], y: &[f64]) -> f64;
}

impl DifferentiableKernel for GaussianKernel {
    fn dim(&self) -> usize {
        GaussianKernel::dim(self)
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.eval_unchecked(x, y)
    }

    fn grad_x(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let k = self.eval_unchecked(x, y);
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.precision_times(&d).iter().map(|v| -k * v).collect()
    }

    fn grad_y(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let k = self.eval_unchecked(x, y);
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.precision_times(&d).iter().map(|v| k * v).collect()
    }

    fn trace_cross(&self, x: &[f64], y: &[f64]) -> f64 {
        let k = self.eval_unchecked(x, y);
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        k * (self.lambda_inv_trace() - self.precision_times(&d).norm_squared())
    }
}

type ScoreFn = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;

#[derive(Clone)]
pub struct SteinKernel {
    base: Arc<dyn DifferentiableKernel>,
    score: ScoreFn,
    offset: f64,
}

impl fmt::Debug for SteinKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SteinKernel {{ base: {:?}, offset: {} }}",
            self.base, self.offset
        )
    }
}

impl SteinKernel {
    pub fn new(
        base: Arc<dyn DifferentiableKernel>,
        score: impl Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
        offset: f64,
    ) -> Self {
        SteinKernel {
            base,
            score: Arc::new(score),
            offset,
        }
    }

    /// Builds the Stein kernel of `base` against `measure`, whose score must exist.
    pub fn from_kernel(base: &Kernel, measure: &Measure, offset: f64) -> Result<Self> {
        let base: Arc<dyn DifferentiableKernel> = match base {
            Kernel::Gaussian(g) => Arc::new(g.clone()),
            other => {
                return Err(Error::Unsupported(format!(
                    "no analytic derivatives for a {} base kernel; implement DifferentiableKernel",
                    other.family()
                )))
            }
        };
        check_dim(base.dim(), measure.dim())?;
        if !offset.is_finite() {
            return Err(Error::InvalidParameter(
                "stein offset must be finite".into(),
            ));
        }
        // Fails early for measures without a score.
        measure.score(&vec![0.0; measure.dim()])?;
        let measure = measure.clone();
        Ok(SteinKernel::new(base, move |x| measure.score(x), offset))
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn base(&self) -> &Arc<dyn DifferentiableKernel> {
        &self.base
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), y.len())?;
        let sx = (self.score)(x)?;
        let sy = (self.score)(y)?;
        let b = &self.base;
        let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(p, q)| p * q).sum::<f64>();
        Ok(b.eval(x, y) * dot(&sx, &sy)
            + dot(&b.grad_x(x, y), &sy)
            + dot(&b.grad_y(x, y), &sx)
            + b.trace_cross(x, y)
            + self.offset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSpec;
    use crate::measures::MeasureSpec;

    fn stein(measure: &Measure, offset: f64) -> Kernel {
        let spec = KernelSpec::Stein {
            base: Box::new(KernelSpec::gaussian(vec![1.0; measure.dim()])),
            offset,
        };
        Kernel::compile(&spec, Some(measure)).unwrap()
    }

    #[test]
    fn value_at_origin() {
        let p = Measure::compile(&MeasureSpec::standard_normal(1)).unwrap();
        assert_eq!(stein(&p, 0.0).eval(&[0.0], &[0.0]).unwrap(), 1.0);
        assert_eq!(stein(&p, 2.5).eval(&[0.0], &[0.0]).unwrap(), 3.5);
    }

    #[test]
    fn gaussian_derivatives_match_finite_differences() {
        let g = GaussianKernel::full(nalgebra::DMatrix::from_row_slice(
            2,
            2,
            &[1.5, 0.3, 0.3, 0.7],
        ))
        .unwrap();
        let (x, y) = ([0.2, -0.4], [0.9, 0.1]);
        let h = 1e-5;
        let gx = g.grad_x(&x, &y);
        let gy = g.grad_y(&x, &y);
        let mut tr = 0.0;
        for i in 0..2 {
            let shift = |p: &[f64], s: f64| {
                let mut q = p.to_vec();
                q[i] += s;
                q
            };
            let fdx = (g.eval(&shift(&x, h), &y) - g.eval(&shift(&x, -h), &y)) / (2.0 * h);
            let fdy = (g.eval(&x, &shift(&y, h)) - g.eval(&x, &shift(&y, -h))) / (2.0 * h);
            assert!((fdx - gx[i]).abs() < 1e-8);
            assert!((fdy - gy[i]).abs() < 1e-8);
            let h2 = 1e-4;
            tr += (g.eval(&shift(&x, h2), &shift(&y, h2))
                - g.eval(&shift(&x, h2), &shift(&y, -h2))
                - g.eval(&shift(&x, -h2), &shift(&y, h2))
                + g.eval(&shift(&x, -h2), &shift(&y, -h2)))
                / (4.0 * h2 * h2);
        }
        assert!((tr - g.trace_cross(&x, &y)).abs() < 1e-6);
    }

    #[test]
    fn non_gaussian_base_is_rejected() {
        let p = Measure::compile(&MeasureSpec::standard_normal(1)).unwrap();
        let spec = KernelSpec::Stein {
            base: Box::new(KernelSpec::matern(2.5, 1.0)),
            offset: 0.0,
        };
        assert!(matches!(
            Kernel::compile(&spec, Some(&p)),
            Err(Error::Unsupported(_))
        ));
        let u = Measure::compile(&MeasureSpec::uniform(&[(0.0, 1.0)])).unwrap();
        let spec = KernelSpec::Stein {
            base: Box::new(KernelSpec::gaussian(vec![1.0])),
            offset: 0.0,
        };
        assert!(Kernel::compile(&spec, Some(&u)).is_err());
    }
}
