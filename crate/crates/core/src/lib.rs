//! Closed-form kernel mean embeddings.
//!
//! For a kernel `K` and a probability measure `P` the embedding is the pair
//! `K_P(x) = ∫ K(x, y) dP(y)` and `K_PP = ∫∫ K(x, y) dP(x) dP(y)`. This crate
//! collects closed forms for the common kernel/measure pairs, builds new ones
//! from products, sums, mixtures and changes of variable, and checks all of
//! them against an independent numerical oracle. The embeddings feed Bayesian
//! quadrature, worst-case errors and MMD.
//!
//! ```
//! use ked_core::{embed, Kernel, KernelSpec, Measure, MeasureSpec};
//!
//! let kernel = Kernel::compile(&KernelSpec::gaussian(vec![1.0]), None).unwrap();
//! let measure = Measure::compile(&MeasureSpec::standard_normal(1)).unwrap();
//! let e = embed(&kernel, &measure).unwrap();
//! assert!((e.kpp - 1.0 / 3f64.sqrt()).abs() < 1e-15);
//! assert!((e.kp(&[0.0]).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
//! ```

pub mod combinators;
pub mod dictionary;
pub mod error;
pub mod kernels;
pub mod measures;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod specfun;
pub mod stein;
pub mod transform;

pub use dictionary::{embed, embed_matrix, embed_spec, Embedding, MatrixEmbedding, Provenance};
pub use error::{Error, Result};
pub use kernels::{Kernel, KernelSpec};
pub use measures::{Measure, MeasureSpec};
pub use oracle::{Budget, Method, OracleEstimate};
pub use quadrature::{BqPosterior, QuadratureProblem};
pub use transform::Transform;
