//! Average binary weight spectra of the almost regular Gallager ensemble.
//!
//! The parity-check matrix has `J` strips of `M` rows. Strip `j` is a column
//! permutation of `[I_M ... I_M 0 ... 0]` with `K_j` identity blocks and
//! `K - K_j` zero blocks, so the code length is `n = M·K` symbols. Over
//! GF(2^m) every nonzero carries an independent uniform nonzero label.
//!
//! Polynomials are kept as natural logs of their coefficients (`-∞` for a
//! zero coefficient). All coefficients involved are nonnegative, so plain
//! log-sum-exp suffices.

use crate::error::{Error, Result};
use crate::special::{ln_binomial, log_add, log_sum_exp};

/// A polynomial stored as `ln` of its coefficients, lowest degree first.
pub type LogPoly = Vec<f64>;

/// Product of two log-domain polynomials.
pub fn log_poly_mul(a: &[f64], b: &[f64]) -> LogPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let na: Vec<usize> = (0..a.len()).filter(|&i| a[i] > f64::NEG_INFINITY).collect();
    let nb: Vec<usize> = (0..b.len()).filter(|&i| b[i] > f64::NEG_INFINITY).collect();
    let mut hi = vec![f64::NEG_INFINITY; a.len() + b.len() - 1];
    for &i in &na {
        for &j in &nb {
            let v = a[i] + b[j];
            if v > hi[i + j] {
                hi[i + j] = v;
            }
        }
    }
    let mut sum = vec![0.0; hi.len()];
    for &i in &na {
        for &j in &nb {
            sum[i + j] += (a[i] + b[j] - hi[i + j]).exp();
        }
    }
    hi.iter()
        .zip(&sum)
        .map(|(&h, &s)| if h == f64::NEG_INFINITY { h } else { h + s.ln() })
        .collect()
}

/// `p^e` by repeated squaring.
pub fn log_poly_pow(p: &[f64], mut e: usize) -> LogPoly {
    let mut result: LogPoly = vec![0.0];
    let mut base = p.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = log_poly_mul(&result, &base);
        }
        e >>= 1;
        if e > 0 {
            base = log_poly_mul(&base, &base);
        }
    }
    result
}

fn ln_binomial_u(n: usize, k: usize) -> f64 {
    ln_binomial(n as f64, k as f64)
}

/// Coefficients of `g(s)^M` with
/// `g(s) = (1+s)^{K-K_i} ((1+s)^{K_i} + (1-s)^{K_i}) / 2`.
pub fn strip_genfun_binary(k: usize, k_i: usize, m_rows: usize) -> LogPoly {
    let even: LogPoly = (0..=k_i)
        .map(|t| {
            if t % 2 == 0 {
                ln_binomial_u(k_i, t)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let pad: LogPoly = (0..=k - k_i).map(|t| ln_binomial_u(k - k_i, t)).collect();
    log_poly_pow(&log_poly_mul(&pad, &even), m_rows)
}

/// `ln` of the number of weight-`t` solutions in GF(q)^{k} of one check with
/// `k` nonzero coefficients: `C(k,t)((q-1)^t + (-1)^t (q-1)) / q`.
fn ln_check_solutions(k: usize, t: usize, q: f64) -> f64 {
    let qm1 = q - 1.0;
    let bracket = if t == 0 {
        q.ln()
    } else if t % 2 == 0 {
        t as f64 * qm1.ln() + qm1.powf(1.0 - t as f64).ln_1p()
    } else {
        let r = qm1.powf(1.0 - t as f64);
        if r >= 1.0 {
            return f64::NEG_INFINITY;
        }
        t as f64 * qm1.ln() + (-r).ln_1p()
    };
    ln_binomial_u(k, t) + (bracket - q.ln())
}

/// Coefficients of `f(φ(s))^M` with
/// `f(s) = (1+(q-1)s)^{K-K_j} ((1+(q-1)s)^{K_j} + (q-1)(1-s)^{K_j}) / q` and
/// `φ(s) = ((1+s)^m - 1)/(q-1)`. The composite has degree `K·m·M`.
pub fn strip_genfun_nb(k: usize, k_j: usize, m_rows: usize, m: u32) -> LogPoly {
    let q = (1u64 << m) as f64;
    let qm1 = q - 1.0;
    let check: LogPoly = (0..=k_j).map(|t| ln_check_solutions(k_j, t, q)).collect();
    let pad: LogPoly = (0..=k - k_j)
        .map(|t| ln_binomial_u(k - k_j, t) + t as f64 * qm1.ln())
        .collect();
    let f = log_poly_mul(&pad, &check);
    let m = m as usize;
    let phi: LogPoly = (0..=m)
        .map(|i| {
            if i == 0 {
                f64::NEG_INFINITY
            } else {
                ln_binomial_u(m, i) - qm1.ln()
            }
        })
        .collect();
    let mut composed: LogPoly = vec![f64::NEG_INFINITY; k * m + 1];
    let mut phi_t: LogPoly = vec![0.0];
    for (t, &c) in f.iter().enumerate() {
        if t > 0 {
            phi_t = log_poly_mul(&phi_t, &phi);
        }
        if c == f64::NEG_INFINITY {
            continue;
        }
        for (w, &v) in phi_t.iter().enumerate() {
            composed[w] = log_add(composed[w], c + v);
        }
    }
    log_poly_pow(&composed, m_rows)
}

/// Parameters of the ensemble.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnsembleSpec {
    /// Maximum row weight.
    pub k: usize,
    /// Row weight `K_j` of every strip; the number of strips is its length.
    pub strip_weights: Vec<usize>,
    /// Rows per strip.
    pub m_rows: usize,
    /// Field degree (1 for binary codes).
    pub m: u32,
}

impl EnsembleSpec {
    pub fn new(k: usize, strip_weights: Vec<usize>, m_rows: usize, m: u32) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidEnsemble(msg));
        if strip_weights.is_empty() {
            return bad("at least one strip is required".into());
        }
        if k == 0 || m_rows == 0 {
            return bad(format!("K and M must be positive, got K={k}, M={m_rows}"));
        }
        if let Some(&w) = strip_weights.iter().find(|&&w| w == 0 || w > k) {
            return bad(format!("strip weight {w} outside 1..={k}"));
        }
        if !(1..=crate::gf::MAX_DEGREE).contains(&m) {
            return Err(Error::FieldDegree(m));
        }
        Ok(EnsembleSpec {
            k,
            strip_weights,
            m_rows,
            m,
        })
    }

    /// `J` strips of constant weight `K`.
    pub fn regular(j: usize, k: usize, m_rows: usize, m: u32) -> Result<Self> {
        Self::new(k, vec![k; j], m_rows, m)
    }

    /// Geometry from a binary length, rejecting non-integer strip heights.
    pub fn from_length(j: usize, k: usize, binary_len: usize, m: u32) -> Result<Self> {
        let per = k * m as usize;
        if binary_len % per != 0 {
            return Err(Error::InvalidEnsemble(format!(
                "binary length {binary_len} is not a multiple of K·m = {per}; M would be {:.3}",
                binary_len as f64 / per as f64
            )));
        }
        Self::regular(j, k, binary_len / per, m)
    }

    pub fn j(&self) -> usize {
        self.strip_weights.len()
    }

    /// Code length in symbols.
    pub fn n(&self) -> usize {
        self.m_rows * self.k
    }

    pub fn binary_len(&self) -> usize {
        self.n() * self.m as usize
    }

    pub fn design_rate(&self) -> f64 {
        1.0 - (self.j() * self.m_rows) as f64 / self.n() as f64
    }

    fn strip_poly(&self, j: usize) -> LogPoly {
        if self.m == 1 {
            strip_genfun_binary(self.k, self.strip_weights[j], self.m_rows)
        } else {
            strip_genfun_nb(self.k, self.strip_weights[j], self.m_rows, self.m)
        }
    }
}

/// Natural logs of average multiplicities `E{A_w}`, `w = 0..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSpectrum {
    log_coeffs: Vec<f64>,
}

impl WeightSpectrum {
    /// Requires `log_coeffs[0] == 0` (the zero word).
    pub fn from_log(log_coeffs: Vec<f64>) -> Result<Self> {
        if log_coeffs.is_empty() {
            return Err(Error::SpectrumLength { got: 0, n: 0 });
        }
        if log_coeffs[0] != 0.0 {
            return Err(Error::InvalidEnsemble(format!(
                "spectrum must start with ln A_0 = 0, got {}",
                log_coeffs[0]
            )));
        }
        if log_coeffs.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(Error::InvalidEnsemble("spectrum entries must be finite or -inf".into()));
        }
        Ok(WeightSpectrum { log_coeffs })
    }

    /// Spectrum of an explicit code from integer multiplicities.
    pub fn from_counts(counts: &[f64]) -> Result<Self> {
        Self::from_log(
            counts
                .iter()
                .map(|&c| if c > 0.0 { c.ln() } else { f64::NEG_INFINITY })
                .collect(),
        )
    }

    /// Random linear code: `S_w = 2^{-n(1-R)} C(n, w)` for `w ≥ 1`.
    pub fn binomial(n: usize, rate: f64) -> Self {
        let shift = -(n as f64) * (1.0 - rate) * std::f64::consts::LN_2;
        let log_coeffs = (0..=n)
            .map(|w| if w == 0 { 0.0 } else { ln_binomial_u(n, w) + shift })
            .collect();
        WeightSpectrum { log_coeffs }
    }

    /// Block length (binary).
    pub fn n(&self) -> usize {
        self.log_coeffs.len() - 1
    }

    pub fn log_coeffs(&self) -> &[f64] {
        &self.log_coeffs
    }

    pub fn ln_at(&self, w: usize) -> f64 {
        self.log_coeffs.get(w).copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// Smallest `w ≥ 1` with `Σ_{1≤v≤w} E{A_v} ≥ 1`.
    pub fn typical_min_distance(&self) -> Option<usize> {
        let mut acc = f64::NEG_INFINITY;
        for (w, &x) in self.log_coeffs.iter().enumerate().skip(1) {
            acc = log_add(acc, x);
            if acc >= 0.0 {
                return Some(w);
            }
        }
        None
    }
}

/// `E{A_w} = C(nm, w)^{1-J} Π_j F_{j,w}` for every `w`.
pub fn ensemble_avg_spectrum(spec: &EnsembleSpec) -> WeightSpectrum {
    let nb = spec.binary_len();
    let strips: Vec<LogPoly> = (0..spec.j()).map(|j| spec.strip_poly(j)).collect();
    let exponent = 1.0 - spec.j() as f64;
    let log_coeffs = (0..=nb)
        .map(|w| {
            if w == 0 {
                return 0.0;
            }
            let prod: f64 = strips.iter().map(|p| p[w]).sum();
            if prod == f64::NEG_INFINITY {
                prod
            } else {
                exponent * ln_binomial_u(nb, w) + prod
            }
        })
        .collect();
    WeightSpectrum { log_coeffs }
}

/// `ln p_j(w) = ln F_{j,w} - ln C(nm, w)`: the probability that a uniform
/// binary word of weight `w` satisfies strip `j`.
pub fn strip_probability(spec: &EnsembleSpec, j: usize, w: usize) -> f64 {
    let p = spec.strip_poly(j);
    let v = p.get(w).copied().unwrap_or(f64::NEG_INFINITY) - ln_binomial_u(spec.binary_len(), w);
    v.min(0.0)
}

/// Total `ln Σ_w e^{c_w}`.
pub fn log_poly_total(p: &[f64]) -> f64 {
    log_sum_exp(p.iter().copied())
}
