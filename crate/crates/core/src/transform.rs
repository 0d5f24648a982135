//! Invertible coordinate-wise maps used by pushforward measures and
//! composed kernels.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{normal_cdf, normal_quantile};

type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A user-supplied invertible map. Only available through the library API.
#[derive(Clone)]
pub struct CustomMap {
    pub name: String,
    pub forward: MapFn,
    pub inverse: MapFn,
}

impl fmt::Debug for CustomMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomMap({})", self.name)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Transform {
    /// `y_i = scale_i · x_i + shift_i`; length-one vectors broadcast.
    Affine {
        scale: Vec<f64>,
        shift: Vec<f64>,
    },
    /// `y_i = mean + std · Φ⁻¹(x_i)`, mapping `(0, 1)` onto the real line.
    NormalInverseCdf {
        mean: f64,
        std: f64,
    },
    /// `y_i = Φ((x_i − mean) / std)`.
    NormalCdf {
        mean: f64,
        std: f64,
    },
    Exp,
    Log,
    #[serde(skip)]
    Custom(CustomMap),
}

impl PartialEq for Transform {
    fn eq(&self, other: &Self) -> bool {
        use Transform::*;
        match (self, other) {
            (Affine { scale: a, shift: b }, Affine { scale: c, shift: d }) => a == c && b == d,
            (NormalInverseCdf { mean: a, std: b }, NormalInverseCdf { mean: c, std: d }) => {
                a == c && b == d
            }
            (NormalCdf { mean: a, std: b }, NormalCdf { mean: c, std: d }) => a == c && b == d,
            (Exp, Exp) | (Log, Log) => true,
            (Custom(a), Custom(b)) => {
                Arc::ptr_eq(&a.forward, &b.forward) && Arc::ptr_eq(&a.inverse, &b.inverse)
            }
            _ => false,
        }
    }
}

fn pick(v: &[f64], i: usize) -> f64 {
    if v.len() == 1 {
        v[0]
    } else {
        v[i]
    }
}

impl Transform {
    pub fn identity() -> Self {
        Transform::Affine {
            scale: vec![1.0],
            shift: vec![0.0],
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Transform::Affine { scale, shift } => {
                for (name, v) in [("scale", scale), ("shift", shift)] {
                    if v.len() != 1 && v.len() != dim {
                        return Err(Error::InvalidParameter(format!(
                            "affine {name} has length {}, expected 1 or {dim}",
                            v.len()
                        )));
                    }
                    if v.iter().any(|s| !s.is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "affine {name} must be finite"
                        )));
                    }
                }
                if scale.contains(&0.0) {
                    return Err(Error::InvalidParameter(
                        "affine scale must be non-zero".into(),
                    ));
                }
                Ok(())
            }
            Transform::NormalInverseCdf { mean, std } | Transform::NormalCdf { mean, std } => {
                if !(std.is_finite() && *std > 0.0 && mean.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "normal map needs finite mean and positive std, got ({mean}, {std})"
                    )));
                }
                Ok(())
            }
            Transform::Exp | Transform::Log | Transform::Custom(_) => Ok(()),
        }
    }

    /// Applies the map to coordinate `i` of a point.
    pub fn forward_coord(&self, i: usize, x: f64) -> f64 {
        match self {
            Transform::Affine { scale, shift } => pick(scale, i) * x + pick(shift, i),
            Transform::NormalInverseCdf { mean, std } => mean + std * normal_quantile(x),
            Transform::NormalCdf { mean, std } => normal_cdf((x - mean) / std),
            Transform::Exp => x.exp(),
            Transform::Log => x.ln(),
            Transform::Custom(c) => (c.forward)(&[x])[0],
        }
    }

    pub fn inverse_coord(&self, i: usize, y: f64) -> f64 {
        match self {
            Transform::Affine { scale, shift } => (y - pick(shift, i)) / pick(scale, i),
            Transform::NormalInverseCdf { mean, std } => normal_cdf((y - mean) / std),
            Transform::NormalCdf { mean, std } => mean + std * normal_quantile(y),
            Transform::Exp => y.ln(),
            Transform::Log => y.exp(),
            Transform::Custom(c) => (c.inverse)(&[y])[0],
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Transform::Custom(c) => (c.forward)(x),
            _ => x
                .iter()
                .enumerate()
                .map(|(i, &v)| self.forward_coord(i, v))
                .collect(),
        }
    }

    pub fn inverse(&self, y: &[f64]) -> Vec<f64> {
        match self {
            Transform::Custom(c) => (c.inverse)(y),
            _ => y
                .iter()
                .enumerate()
                .map(|(i, &v)| self.inverse_coord(i, v))
                .collect(),
        }
    }

    pub fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Transform::Custom(c) => out.copy_from_slice(&(c.forward)(x)),
            _ => {
                for (i, (o, &v)) in out.iter_mut().zip(x).enumerate() {
                    *o = self.forward_coord(i, v);
                }
            }
        }
    }

    /// Checks that `x` lies in the domain of the forward map.
    pub fn check_domain(&self, x: &[f64]) -> Result<()> {
        let bad = match self {
            Transform::NormalInverseCdf { .. } => x.iter().any(|&v| !(v > 0.0 && v < 1.0)),
            Transform::Log => x.iter().any(|&v| !(v > 0.0)),
            _ => false,
        };
        if bad {
            return Err(Error::OutsideDomain(format!(
                "{x:?} is outside the domain of {self:?}"
            )));
        }
        Ok(())
    }

    /// Checks that `y` lies in the range of the forward map (the inverse's domain).
    pub fn check_range(&self, y: &[f64]) -> Result<()> {
        let bad = match self {
            Transform::NormalCdf { .. } => y.iter().any(|&v| !(v > 0.0 && v < 1.0)),
            Transform::Exp => y.iter().any(|&v| !(v > 0.0)),
            _ => false,
        };
        if bad {
            return Err(Error::OutsideDomain(format!(
                "{y:?} is outside the range of {self:?}"
            )));
        }
        Ok(())
    }
}
