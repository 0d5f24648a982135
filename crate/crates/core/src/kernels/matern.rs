//! Half-integer Matérn kernels `ν = n + 1/2`, `n ∈ {0, 1, 2, 3}`.

use crate::specfun::factorial;

/// Explicit forms for `n = 0..=3` as functions of `τ = ‖x - y‖ / ℓ`.
pub fn matern_special(n: u32, tau: f64) -> f64 {
    match n {
        0 => (-tau).exp(),
        1 => {
            let s = 3f64.sqrt() * tau;
            (1.0 + s) * (-s).exp()
        }
        2 => {
            let s = 5f64.sqrt() * tau;
            (1.0 + s + 5.0 / 3.0 * tau * tau) * (-s).exp()
        }
        3 => {
            let s = 7f64.sqrt() * tau;
            let t2 = tau * tau;
            (1.0 + s + 14.0 / 5.0 * t2 + 7f64.powf(1.5) / 15.0 * t2 * tau) * (-s).exp()
        }
        _ => panic!("Matérn order n = {n} is not supported"),
    }
}

/// The general half-integer product formula, valid for any `n`.
pub fn matern_general(n: u32, tau: f64) -> f64 {
    let k = (2.0 * n as f64 + 1.0).sqrt();
    let base = 2.0 * k * tau;
    let mut sum = 0.0;
    for j in 0..=n {
        sum += factorial(n + j) / (factorial(j) * factorial(n - j)) * base.powi((n - j) as i32);
    }
    (-k * tau).exp() * factorial(n) / factorial(2 * n) * sum
}

/// `c_{n,m} = (1/m!) Σ_{i=0}^{n-m} (n+i)!/i! · 2^{n-i}` for `m = 0..=n`.
pub fn uniform_coefficients(n: u32) -> Vec<f64> {
    (0..=n)
        .map(|m| {
            let s: f64 = (0..=n - m)
                .map(|i| factorial(n + i) / factorial(i) * 2f64.powi((n - i) as i32))
                .sum();
            s / factorial(m)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_matches_special() {
        for n in 0..=3 {
            for i in 0..1000 {
                let tau = i as f64 * 0.01;
                let a = matern_general(n, tau);
                let b = matern_special(n, tau);
                assert!(((a - b) / b).abs() < 1e-13, "n={n} tau={tau}");
            }
        }
    }

    #[test]
    fn coefficients() {
        assert_eq!(uniform_coefficients(0), vec![1.0]);
        assert_eq!(uniform_coefficients(1), vec![4.0, 2.0]);
        // c_{2,0} = 2!·4 + 3!·2 + 4!/2 = 8 + 12 + 12 = 32.
        assert_eq!(uniform_coefficients(2)[0], 32.0);
        for n in 0..=3 {
            assert!(uniform_coefficients(n).iter().all(|&c| c > 0.0));
        }
    }

    #[test]
    fn half_order_at_unit_distance() {
        assert_eq!(matern_special(0, 1.0), (-1f64).exp());
    }
}
