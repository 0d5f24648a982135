//! Gauss–Legendre and Gauss–Hermite rules, computed by Newton iteration on
//! the three-term recurrences and cached per node count.

use nalgebra::DMatrix;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights of an interpolatory rule, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

type Cache = Mutex<HashMap<usize, Arc<Rule>>>;

fn cached(cache: &'static OnceLock<Cache>, n: usize, build: fn(usize) -> Rule) -> Arc<Rule> {
    let cache = cache.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(build(n));
    cache
        .lock()
        .expect("rule cache poisoned")
        .entry(n)
        .or_insert(rule)
        .clone()
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    assert!(n >= 1, "a quadrature rule needs at least one node");
    cached(&CACHE, n, build_legendre)
}

/// `n`-point Gauss–Hermite rule for the weight `exp(-z²)` on the real line.
pub fn gauss_hermite(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    assert!(n >= 1, "a quadrature rule needs at least one node");
    cached(&CACHE, n, build_hermite)
}

/// Legendre `P_n(z)` and its derivative.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p1, mut p2) = (1.0, 0.0);
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
    }
    let dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
    (p1, dp)
}

fn build_legendre(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let step = p / d;
            z -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        if n % 2 == 1 && i == n / 2 {
            z = 0.0;
            dp = legendre(n, 0.0).1;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// Orthonormal Hermite function `ψ_n(z) = h_n(z) e^{-z²/2}` and `ψ_{n-1}(z)`.
///
/// Carrying the Gaussian factor keeps the recurrence bounded for large `n`.
fn hermite_functions(n: usize, z: f64) -> (f64, f64) {
    let (mut p1, mut p2) = (std::f64::consts::PI.powf(-0.25) * (-0.5 * z * z).exp(), 0.0);
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / j as f64).sqrt() * p2 - ((j - 1) as f64 / j as f64).sqrt() * p3;
    }
    (p1, p2)
}

fn build_hermite(n: usize) -> Rule {
    let nf = n as f64;
    // Starting points: eigenvalues of the Jacobi matrix (off-diagonal √(k/2)),
    // then Newton on the Hermite function itself.
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut guesses: Vec<f64> = jacobi
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .filter(|z| *z >= -1e-8)
        .collect();
    guesses.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let half = n.div_ceil(2);
    let mut pos = vec![0.0; half];
    let mut wts = vec![0.0; half];
    for i in 0..half {
        // Largest roots first, matching the original ordering below.
        let mut z = guesses[guesses.len() - 1 - i];
        if n % 2 == 1 && i == n / 2 {
            z = 0.0;
        } else {
            for _ in 0..100 {
                let (p, pm1) = hermite_functions(n, z);
                let step = p / ((2.0 * nf).sqrt() * pm1 - z * p);
                z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
        }
        let dp = (2.0 * nf).sqrt() * hermite_functions(n, z).1;
        pos[i] = z;
        // 2 / h_n'(z)² with h' = dp · e^{z²/2}.
        wts[i] = 2.0 * (-z * z).exp() / (dp * dp);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..pos.len() {
        nodes[i] = -pos[i];
        nodes[n - 1 - i] = pos[i];
        weights[i] = wts[i];
        weights[n - 1 - i] = wts[i];
    }
    Rule { nodes, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_reference_nodes() {
        // numpy.polynomial.legendre.leggauss(20), last three nodes and weights.
        let r = gauss_legendre(20);
        let want_x = [0.9122344282513258, 0.9639719272779138, 0.9931285991850949];
        let want_w = [
            0.06267204833410944,
            0.04060142980038622,
            0.017614007139153273,
        ];
        for k in 0..3 {
            assert!((r.nodes[17 + k] - want_x[k]).abs() < 1e-14);
            assert!((r.weights[17 + k] - want_w[k]).abs() < 1e-14);
        }
        assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_reference_nodes() {
        // numpy.polynomial.hermite.hermgauss(20), last three nodes and weights.
        let r = gauss_hermite(20);
        let want_x = [3.944764040115625, 4.603682449550744, 5.387480890011233];
        let want_w = [
            1.0860693707692782e-07,
            4.3993409922731747e-10,
            2.2293936455341447e-13,
        ];
        for k in 0..3 {
            assert!((r.nodes[17 + k] - want_x[k]).abs() < 1e-13);
            assert!(((r.weights[17 + k] - want_w[k]) / want_w[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn hermite_large_n_is_finite_and_normalised() {
        for n in [200, 400] {
            let r = gauss_hermite(n);
            assert!(r.nodes.iter().chain(&r.weights).all(|v| v.is_finite()));
            let total: f64 = r.weights.iter().sum();
            assert!(
                (total - std::f64::consts::PI.sqrt()).abs() < 1e-13,
                "{n}: {}",
                total - std::f64::consts::PI.sqrt()
            );
            // E[z⁴] for z ~ N(0, 1/2) is 3/4.
            let m4: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(z, w)| w * z.powi(4))
                .sum::<f64>()
                / std::f64::consts::PI.sqrt();
            assert!((m4 - 0.75).abs() < 1e-12, "{n}: {m4}");
        }
    }

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let r = gauss_legendre(64);
        for k in 0..=20u32 {
            let got: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(x, w)| w * x.powi(k as i32))
                .sum();
            let want = if k % 2 == 1 {
                0.0
            } else {
                2.0 / (k as f64 + 1.0)
            };
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn cache_returns_same_rule() {
        assert!(Arc::ptr_eq(&gauss_legendre(33), &gauss_legendre(33)));
    }
}
