//! Special functions used by the embedding formulas.
//!
//! `erf`/`erfc` follow the FreeBSD `s_erf.c` rational approximations (SunPro,
//! 1993), which are accurate to within one ulp over the whole real line. The
//! same rational pieces give the scaled complement `erfcx(x) = exp(x²)·erfc(x)`
//! without ever forming `exp(x²)` for large arguments, which is what the
//! Matérn–Gaussian embeddings need in the tails.

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

const ERX: f64 = 8.450_629_115_104_675e-1;

const EFX: f64 = 1.283_791_670_955_126e-1;
const EFX8: f64 = 1.027_033_336_764_100_7;
const PP0: f64 = 1.283_791_670_955_125_6e-1;
const PP1: f64 = -3.250_421_072_470_015e-1;
const PP2: f64 = -2.848_174_957_559_851e-2;
const PP3: f64 = -5.770_270_296_489_442e-3;
const PP4: f64 = -2.376_301_665_665_016_3e-5;
const QQ1: f64 = 3.979_172_239_591_553_5e-1;
const QQ2: f64 = 6.502_224_998_876_73e-2;
const QQ3: f64 = 5.081_306_281_875_766e-3;
const QQ4: f64 = 1.324_947_380_043_216_4e-4;
const QQ5: f64 = -3.960_228_278_775_368e-6;

const PA0: f64 = -2.362_118_560_752_659_4e-3;
const PA1: f64 = 4.148_561_186_837_483_3e-1;
const PA2: f64 = -3.722_078_760_357_013e-1;
const PA3: f64 = 3.183_466_199_011_617_5e-1;
const PA4: f64 = -1.108_946_942_823_966_8e-1;
const PA5: f64 = 3.547_830_432_561_823_6e-2;
const PA6: f64 = -2.166_375_594_868_791e-3;
const QA1: f64 = 1.064_208_804_008_442_3e-1;
const QA2: f64 = 5.403_979_177_021_71e-1;
const QA3: f64 = 7.182_865_441_419_627e-2;
const QA4: f64 = 1.261_712_198_087_616_4e-1;
const QA5: f64 = 1.363_708_391_202_905e-2;
const QA6: f64 = 1.198_449_984_679_910_7e-2;

const RA0: f64 = -9.864_944_034_847_148e-3;
const RA1: f64 = -6.938_585_727_071_818e-1;
const RA2: f64 = -1.055_862_622_532_329_1e1;
const RA3: f64 = -6.237_533_245_032_600_6e1;
const RA4: f64 = -1.623_966_694_625_734_7e2;
const RA5: f64 = -1.846_050_929_067_110_4e2;
const RA6: f64 = -8.128_743_550_630_66e1;
const RA7: f64 = -9.814_329_344_169_145;
const SA1: f64 = 1.965_127_166_743_925_7e1;
const SA2: f64 = 1.376_577_541_435_190_4e2;
const SA3: f64 = 4.345_658_774_752_292_3e2;
const SA4: f64 = 6.453_872_717_332_679e2;
const SA5: f64 = 4.290_081_400_275_678_3e2;
const SA6: f64 = 1.086_350_055_417_794_4e2;
const SA7: f64 = 6.570_249_770_319_282;
const SA8: f64 = -6.042_441_521_485_81e-2;

const RB0: f64 = -9.864_942_924_700_1e-3;
const RB1: f64 = -7.992_832_376_805_23e-1;
const RB2: f64 = -1.775_795_491_775_475_2e1;
const RB3: f64 = -1.606_363_848_558_219_2e2;
const RB4: f64 = -6.375_664_433_683_896e2;
const RB5: f64 = -1.025_095_131_611_077_2e3;
const RB6: f64 = -4.835_191_916_086_514e2;
const SB1: f64 = 3.033_806_074_348_246e1;
const SB2: f64 = 3.257_925_129_965_739e2;
const SB3: f64 = 1.536_729_586_084_437e3;
const SB4: f64 = 3.199_858_219_508_595_5e3;
const SB5: f64 = 2.553_050_406_433_164_4e3;
const SB6: f64 = 4.745_285_412_069_553_7e2;
const SB7: f64 = -2.244_095_244_658_582e1;

fn small_ratio(z: f64) -> f64 {
    let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
    let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
    r / s
}

fn near_one_ratio(s: f64) -> f64 {
    let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
    let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
    p / q
}

/// `R/S` such that `erfc(x) = exp(-x² - 0.5625 + R/S) / x` for `x >= 1.25`.
fn tail_exponent(x: f64) -> f64 {
    let s = 1.0 / (x * x);
    if x < 1.0 / 0.35 {
        let r =
            RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7))))));
        let q = 1.0
            + s * (SA1
                + s * (SA2 + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8)))))));
        r / q
    } else {
        let r = RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6)))));
        let q =
            1.0 + s * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7))))));
        r / q
    }
}

/// erfc for `x >= 1.25`, splitting `x²` so the exponent keeps full precision.
fn erfc_tail(x: f64) -> f64 {
    let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
    (-z * z - 0.5625).exp() * ((z - x) * (z + x) + tail_exponent(x)).exp() / x
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let v = if ax < 0.84375 {
        if ax < 3.725_290_298_461_914e-9 {
            if ax < 2.848_094_538_889_218e-306 {
                0.125 * (8.0 * ax + EFX8 * ax)
            } else {
                ax + EFX * ax
            }
        } else {
            ax + ax * small_ratio(ax * ax)
        }
    } else if ax < 1.25 {
        ERX + near_one_ratio(ax - 1.0)
    } else if ax >= 6.0 {
        1.0
    } else {
        1.0 - erfc_tail(ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Complementary error function `1 - erf(x)`, accurate in the right tail.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    if ax < 0.84375 {
        let y = if ax < 1.387_778_780_781_445_7e-17 {
            0.0
        } else {
            small_ratio(ax * ax)
        };
        if x < 0.25 {
            return 1.0 - (x + x * y);
        }
        return 0.5 - (x * y + (x - 0.5));
    }
    if ax < 1.25 {
        let pq = near_one_ratio(ax - 1.0);
        return if x > 0.0 {
            1.0 - ERX - pq
        } else {
            1.0 + ERX + pq
        };
    }
    if x > 0.0 {
        if x >= 28.0 {
            // Past 28 the value underflows, but erfcx stays representable.
            return erfcx(x) * (-x * x).exp();
        }
        erfc_tail(x)
    } else if ax < 6.0 {
        2.0 - erfc_tail(ax)
    } else {
        2.0
    }
}

/// Scaled complementary error function `exp(x²)·erfc(x)`.
///
/// For `x >= 1.25` this never forms `exp(x²)`, so it stays finite (and
/// decays like `1/(x√π)`) for arbitrarily large arguments.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        // Overflows to +inf for x < -26.6, as the true value does.
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x < 1.25 {
        return (x * x).exp() * erfc(x);
    }
    if x > 1e8 {
        return FRAC_1_SQRT_PI / x;
    }
    (-0.5625 + tail_exponent(x)).exp() / x
}

/// Standard normal cumulative distribution function.
///
/// Below -8 the value is assembled from `erfcx` and a separate Gaussian
/// factor so that it keeps full relative precision deep in the left tail.
pub fn normal_cdf(x: f64) -> f64 {
    if x <= -8.0 {
        let u = -x * std::f64::consts::FRAC_1_SQRT_2;
        return 0.5 * erfcx(u) * (-0.5 * x * x).exp();
    }
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `ln Φ(x)`, finite for every finite `x`.
pub fn log_normal_cdf(x: f64) -> f64 {
    if x < -1.0 {
        let u = -x * std::f64::consts::FRAC_1_SQRT_2;
        return (0.5 * erfcx(u)).ln() - 0.5 * x * x;
    }
    (-0.5 * erfc(x * std::f64::consts::FRAC_1_SQRT_2)).ln_1p()
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// The unnormalised Gaussian bump `exp(-x²/(2σ²))`.
pub fn gaussian_bump(x: f64, sigma: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma)).exp()
}

/// Inverse of the standard normal CDF.
///
/// Acklam's rational starting point followed by two Halley corrections
/// against [`normal_cdf`].
pub fn normal_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let mut x = if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    };
    for _ in 0..2 {
        // Work with the smaller tail to avoid cancellation in Φ(x) - p.
        let e = if x < 0.0 {
            normal_cdf(x) - p
        } else {
            (1.0 - p) - normal_cdf(-x)
        };
        let u = e / normal_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// `m!` as a float (exact up to 22!).
pub fn factorial(m: u32) -> f64 {
    (1..=m).fold(1.0, |acc, k| acc * k as f64)
}

/// Lower incomplete gamma function at integer shape, `γ(m+1, x) = ∫₀ˣ tᵐ e⁻ᵗ dt`.
///
/// Equals `m!·(1 - e⁻ˣ Σ_{i≤m} xⁱ/i!)`. For `x < m+1` that difference
/// cancels badly, so the convergent series
/// `x^{m+1} e⁻ˣ Σ_k x^k / ((m+1)(m+2)…(m+1+k))` is summed instead.
pub fn lower_incomplete_gamma_int(m: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "incomplete gamma argument must be non-negative, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(factorial(m));
    }
    let mf = m as f64;
    if x < mf + 1.0 {
        let mut term = 1.0 / (mf + 1.0);
        let mut sum = term;
        let mut k = 1.0;
        while term > sum * 1e-17 {
            term *= x / (mf + 1.0 + k);
            sum += term;
            k += 1.0;
        }
        Ok(sum * (x.ln() * (mf + 1.0) - x).exp())
    } else {
        let mut term = 1.0;
        let mut partial = 1.0;
        for i in 1..=m {
            term *= x / i as f64;
            partial += term;
        }
        Ok(factorial(m) * (1.0 - (-x).exp() * partial))
    }
}

/// Bernoulli numbers B_0..B_12 as exact rationals (numerator, denominator).
const BERNOULLI_NUMBERS: [(i64, i64); 13] = [
    (1, 1),
    (-1, 2),
    (1, 6),
    (0, 1),
    (-1, 30),
    (0, 1),
    (1, 42),
    (0, 1),
    (-1, 30),
    (0, 1),
    (5, 66),
    (0, 1),
    (-691, 2730),
];

fn binomial(n: i64, k: i64) -> i64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Exact rational coefficients of `B_n(t) = Σ_k C(n,k) B_k t^{n-k}`,
/// returned lowest power first.
pub fn bernoulli_coefficients(degree: u32) -> Result<Vec<(i64, i64)>> {
    if !degree.is_multiple_of(2) || !(2..=12).contains(&degree) {
        return Err(Error::InvalidParameter(format!(
            "Bernoulli polynomial degree must be even and in 2..=12, got {degree}"
        )));
    }
    let n = degree as i64;
    let mut coeffs = vec![(0i64, 1i64); degree as usize + 1];
    for k in 0..=n {
        let (num, den) = BERNOULLI_NUMBERS[k as usize];
        let c = binomial(n, k) * num;
        let g = gcd(c, den).max(1);
        coeffs[(n - k) as usize] = (c / g, den / g);
    }
    Ok(coeffs)
}

/// Bernoulli polynomial `B_degree(t)` for even degree 2..=12 and `t ∈ [0, 1]`.
pub fn bernoulli_poly(degree: u32, t: f64) -> Result<f64> {
    let coeffs = bernoulli_coefficients(degree)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "Bernoulli polynomial argument must lie in [0, 1], got {t}"
        )));
    }
    Ok(coeffs
        .iter()
        .rev()
        .fold(0.0, |acc, &(num, den)| acc * t + num as f64 / den as f64))
}

/// Double factorial `n!!` for odd `n >= -1`, with `(-1)!! = 1`.
pub fn double_factorial(n: i64) -> Result<u128> {
    if n < -1 || n % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "double factorial is only defined here for odd n >= -1, got {n}"
        )));
    }
    let mut acc: u128 = 1;
    let mut k = n;
    while k > 1 {
        acc = acc
            .checked_mul(k as u128)
            .ok_or_else(|| Error::InvalidParameter(format!("{n}!! overflows u128")))?;
        k -= 2;
    }
    Ok(acc)
}
