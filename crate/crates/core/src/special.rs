//! Log-domain special functions.
//!
//! Everything returns natural logarithms so that block lengths in the
//! thousands do not underflow.

use std::f64::consts::{LN_2, PI};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;
const TINY: f64 = 1e-300;

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Reflection keeps the shift below short for tiny arguments.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let mut shift = 0.0;
    let mut z = x;
    while z < 10.0 {
        shift -= z.ln();
        z += 1.0;
    }
    // Stirling series with Bernoulli terms up to z^-13.
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut p = inv;
    for c in C {
        series += c * p;
        p *= inv2;
    }
    shift + (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln C(n, k)` for real `n ≥ k ≥ 0`.
pub fn ln_binomial(n: f64, k: f64) -> f64 {
    if k < 0.0 || k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0.0 || k == n {
        return 0.0;
    }
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// `ln(e^a + e^b)`.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_i}`; `-∞` for an empty input.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    if hi == f64::INFINITY {
        return hi;
    }
    hi + xs.iter().map(|&x| (x - hi).exp()).sum::<f64>().ln()
}

/// `ln(1 - e^x)` for `x ≤ 0`.
pub fn ln_one_minus_exp(x: f64) -> f64 {
    if x > -LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Prefix `x^a e^{-x} / Γ(a)` in log form.
fn gamma_prefix(a: f64, x: f64) -> f64 {
    a * x.ln() - x - ln_gamma(a)
}

/// Series for `ln P(a, x)`, accurate for `x < a + 1`.
fn ln_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    gamma_prefix(a, x) + sum.ln()
}

/// Modified Lentz continued fraction for `ln Q(a, x)`, for `x ≥ a + 1`.
fn ln_q_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    gamma_prefix(a, x) + h.ln()
}

/// `ln P(a, x)`, the regularized lower incomplete gamma function.
pub fn ln_gamma_p(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0);
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x < a + 1.0 {
        ln_p_series(a, x)
    } else {
        ln_one_minus_exp(ln_q_fraction(a, x))
    }
}

/// `ln Q(a, x) = ln(1 - P(a, x))`.
pub fn ln_gamma_q(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::NEG_INFINITY;
    }
    if x < a + 1.0 {
        ln_one_minus_exp(ln_p_series(a, x))
    } else {
        ln_q_fraction(a, x)
    }
}

/// Continued fraction for the incomplete beta function.
fn beta_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `ln I_x(a, b)`, the regularized incomplete beta function.
pub fn ln_beta_inc(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if x >= 1.0 {
        return 0.0;
    }
    let front = |a: f64, b: f64, x: f64| a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b) - a.ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        front(a, b, x) + beta_fraction(a, b, x).ln()
    } else {
        ln_one_minus_exp(front(b, a, 1.0 - x) + beta_fraction(b, a, 1.0 - x).ln())
    }
}

/// Log CDF and log density of the χ² distribution with `k` degrees of
/// freedom at `x`.
pub fn chi2_cdf_log(k: f64, x: f64) -> (f64, f64) {
    (ln_gamma_p(k / 2.0, x / 2.0), chi2_ln_pdf(k, x))
}

/// Log survival function of χ²_k at `x`.
pub fn chi2_sf_log(k: f64, x: f64) -> f64 {
    ln_gamma_q(k / 2.0, x / 2.0)
}

pub fn chi2_ln_pdf(k: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return if k == 2.0 {
            -LN_2
        } else if k < 2.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
    }
    (k / 2.0 - 1.0) * x.ln() - x / 2.0 - (k / 2.0) * LN_2 - ln_gamma(k / 2.0)
}

/// `ln Q(x)` for the standard normal upper tail.
pub fn ln_q_func(x: f64) -> f64 {
    if x < 0.0 {
        return ln_one_minus_exp(ln_q_func(-x));
    }
    // Q(x) = P(χ²_1 > x²) / 2.
    ln_gamma_q(0.5, x * x / 2.0) - LN_2
}

/// `ln φ(x)` for the standard normal density.
pub fn ln_normal_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.5 * (2.0 * PI).ln()
}
