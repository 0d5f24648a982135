use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `exp(-½ (x-y)ᵀ Λ⁻¹ (x-y))` with Λ either diagonal or full.
#[derive(Debug, Clone)]
pub struct GaussianKernel {
    /// Per-dimension lengthscales when Λ is diagonal.
    pub lengthscales: Option<Vec<f64>>,
    /// The lengthscale matrix Λ.
    pub lambda: DMatrix<f64>,
    /// Inverse Cholesky factor `L⁻¹` of Λ = L Lᵀ.
    linv: DMatrix<f64>,
}

impl GaussianKernel {
    pub fn diagonal(lengthscales: Vec<f64>) -> Result<Self> {
        if lengthscales.is_empty() {
            return Err(Error::InvalidParameter(
                "gaussian kernel needs at least one lengthscale".into(),
            ));
        }
        if lengthscales.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "lengthscales must be positive and finite, got {lengthscales:?}"
            )));
        }
        let lambda = DMatrix::from_diagonal(&DVector::from_iterator(
            lengthscales.len(),
            lengthscales.iter().map(|l| l * l),
        ));
        let linv = DMatrix::from_diagonal(&DVector::from_iterator(
            lengthscales.len(),
            lengthscales.iter().map(|l| 1.0 / l),
        ));
        Ok(GaussianKernel {
            lengthscales: Some(lengthscales),
            lambda,
            linv,
        })
    }

    pub fn full(lambda: DMatrix<f64>) -> Result<Self> {
        let linv = inverse_cholesky(&lambda, "lengthscale matrix")?;
        Ok(GaussianKernel {
            lengthscales: None,
            lambda,
            linv,
        })
    }

    pub fn dim(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn is_diagonal(&self) -> bool {
        self.lengthscales.is_some()
    }

    /// `Λ⁻¹ (x - y)`.
    pub fn precision_times(&self, d: &[f64]) -> DVector<f64> {
        let v = &self.linv * DVector::from_column_slice(d);
        self.linv.transpose() * v
    }

    pub fn lambda_inv_trace(&self) -> f64 {
        self.linv.iter().map(|v| v * v).sum()
    }

    pub fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let q = match &self.lengthscales {
            Some(ls) => x
                .iter()
                .zip(y)
                .zip(ls)
                .map(|((a, b), l)| {
                    let t = (a - b) / l;
                    t * t
                })
                .sum::<f64>(),
            None => {
                let n = x.len();
                let mut q = 0.0;
                for i in 0..n {
                    let mut v = 0.0;
                    for j in 0..=i {
                        v += self.linv[(i, j)] * (x[j] - y[j]);
                    }
                    q += v * v;
                }
                q
            }
        };
        (-0.5 * q).exp()
    }
}

/// Checks symmetry and positive definiteness, returning `L⁻¹` for `A = L Lᵀ`.
pub(crate) fn inverse_cholesky(a: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let chol = checked_cholesky(a, what)?;
    let l = chol.l();
    let n = l.nrows();
    l.solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::InvalidParameter(format!("{what} is singular")))
}

pub(crate) fn checked_cholesky(
    a: &DMatrix<f64>,
    what: &str,
) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::InvalidParameter(format!(
            "{what} must be a non-empty square matrix"
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what} must be finite")));
    }
    let scale = a.amax().max(f64::MIN_POSITIVE);
    for i in 0..a.nrows() {
        for j in 0..i {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidParameter(format!("{what} must be symmetric")));
            }
        }
    }
    nalgebra::Cholesky::new(a.clone())
        .ok_or_else(|| Error::InvalidParameter(format!("{what} must be positive definite")))
}

/// Converts nested rows into a matrix, checking they are rectangular.
pub(crate) fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if n == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidParameter(format!(
            "{what} must be a non-empty rectangular matrix"
        )));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}
