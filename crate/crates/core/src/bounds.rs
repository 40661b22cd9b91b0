//! Bounds on the ML frame error probability over the BPSK-AWGN channel.
//!
//! Conventions: unit-energy BPSK, codewords on the sphere of radius `√n`,
//! `σ² = 1 / (2R·10^{SNRb/10})`. Probabilities are returned as natural logs.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::{chi2_sf_log, ln_beta_inc, ln_gamma_p, ln_normal_pdf, ln_q_func, log_add, log_sum_exp};
use crate::spectrum::WeightSpectrum;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelPoint {
    /// Binary block length.
    pub n: usize,
    pub rate: f64,
    pub snr_db: f64,
    pub sigma: f64,
}

impl ChannelPoint {
    pub fn new(n: usize, rate: f64, snr_db: f64) -> Result<Self> {
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::InvalidChannel(format!("rate {rate} outside (0, 1)")));
        }
        if n < 3 {
            return Err(Error::InvalidChannel(format!("block length {n} below 3")));
        }
        if !snr_db.is_finite() {
            return Err(Error::InvalidChannel(format!("snr {snr_db} dB")));
        }
        Ok(ChannelPoint {
            n,
            rate,
            snr_db,
            sigma: sigma_from_snr(rate, snr_db),
        })
    }
}

/// Noise standard deviation for a rate and an SNR per bit in dB.
pub fn sigma_from_snr(rate: f64, snr_db: f64) -> f64 {
    (1.0 / (2.0 * rate * 10f64.powf(snr_db / 10.0))).sqrt()
}

/// `ln(Ω_n(θ)/Ω_n(π))`, the fraction of the sphere inside a cone of
/// half-angle `θ`: `∫_0^θ sin^{n-2} / ∫_0^π sin^{n-2}`.
pub fn log_solid_angle_ratio(n: usize, theta: f64) -> f64 {
    let a = (n as f64 - 1.0) / 2.0;
    if theta <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if theta >= PI {
        return 0.0;
    }
    let s2 = theta.sin().powi(2);
    let half = ln_beta_inc(a, 0.5, s2) - LN_2;
    if theta <= PI / 2.0 {
        half
    } else {
        crate::special::ln_one_minus_exp(half)
    }
}

/// Cone half-angle with solid-angle fraction `2^{-nR}`.
pub fn solve_cone_half_angle(n: usize, rate: f64) -> f64 {
    if rate <= 0.0 {
        return PI;
    }
    let target = -(n as f64) * rate * LN_2;
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_solid_angle_ratio(n, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `G(θ) = (cos θ + √(cos²θ + 4σ²)) / (2σ)`.
pub fn shannon_g(theta: f64, sigma: f64) -> f64 {
    let c = theta.cos();
    (c + (c * c + 4.0 * sigma * sigma).sqrt()) / (2.0 * sigma)
}

/// Sphere-packing exponent
/// `F_L(θ) = (1 - σG cos θ - 2σ² ln(G sin θ)) / (2σ²)`.
pub fn shannon_exponent(theta: f64, sigma: f64) -> f64 {
    let g = shannon_g(theta, sigma);
    let s2 = sigma * sigma;
    (1.0 - sigma * g * theta.cos() - 2.0 * s2 * (g * theta.sin()).ln()) / (2.0 * s2)
}

/// Approximate sphere-packing lower bound on the frame error probability:
/// `σ√(n-1) / (6n(1+σ)) · exp((3σ² - (σ+1)²)/(2σ²)) · e^{-n F_L(θ₀)}`.
pub fn shannon_lower_bound(cp: &ChannelPoint) -> Result<f64> {
    let s = cp.sigma;
    if !(s > 1e-12) || !s.is_finite() {
        return Err(Error::InvalidChannel(format!("degenerate noise level sigma={s}")));
    }
    let n = cp.n as f64;
    let theta = solve_cone_half_angle(cp.n, cp.rate);
    let pre = (s * (n - 1.0).sqrt() / (6.0 * n * (1.0 + s))).ln() + (3.0 * s * s - (s + 1.0).powi(2)) / (2.0 * s * s);
    Ok((pre - n * shannon_exponent(theta, s)).min(0.0))
}

/// Exact sphere-packing probability: the chance that the noise carries the
/// received point outside the cone of half-angle `θ₀` around the
/// transmitted codeword. The approximation above never exceeds it.
pub fn sphere_packing_exact(cp: &ChannelPoint) -> Result<f64> {
    let s = cp.sigma;
    if !(s > 1e-12) || !s.is_finite() {
        return Err(Error::InvalidChannel(format!("degenerate noise level sigma={s}")));
    }
    let n = cp.n as f64;
    let sq = n.sqrt();
    let tan = solve_cone_half_angle(cp.n, cp.rate).tan();
    let g = |x: f64| {
        let r = (sq - x) * tan;
        ln_normal_pdf(x / s) - s.ln() + chi2_sf_log(n - 1.0, r * r / s / s)
    };
    let reach = 25.0 * s;
    let v = log_integrate(&g, -reach, reach.min(sq), &Quadrature::default());
    Ok(log_add(v, ln_q_func(sq / s)).min(0.0))
}

/// Relative tolerance and panel count for the log-domain quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            rel_tol: 1e-9,
            panels: 64,
        }
    }
}

impl Quadrature {
    /// Same scheme with every tolerance and panel width halved.
    pub fn refined(self) -> Self {
        Quadrature {
            rel_tol: self.rel_tol / 2.0,
            panels: self.panels * 2,
        }
    }
}

fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let h = b - a;
    let left = h / 12.0 * (fa + 4.0 * flm + fm);
    let right = h / 12.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// `ln ∫_a^b e^{g(t)} dt` by adaptive Simpson on a shifted integrand.
pub fn log_integrate(g: &dyn Fn(f64) -> f64, a: f64, b: f64, quad: &Quadrature) -> f64 {
    if !(b > a) {
        return f64::NEG_INFINITY;
    }
    let panels = quad.panels.max(1);
    let h = (b - a) / panels as f64;
    let grid: Vec<f64> = (0..=2 * panels).map(|i| a + 0.5 * h * i as f64).collect();
    let logs: Vec<f64> = grid.iter().map(|&t| g(t)).collect();
    let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return shift;
    }
    let f = |t: f64| (g(t) - shift).exp();
    let vals: Vec<f64> = logs.iter().map(|&l| (l - shift).exp()).collect();
    let coarse: f64 = (0..panels)
        .map(|p| h / 6.0 * (vals[2 * p] + 4.0 * vals[2 * p + 1] + vals[2 * p + 2]))
        .sum();
    let tol = (quad.rel_tol * coarse).max(1e-300) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let (a0, b0) = (grid[2 * p], grid[2 * p + 2]);
        let (fa, fm, fb) = (vals[2 * p], vals[2 * p + 1], vals[2 * p + 2]);
        let whole = h / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_rec(&f, a0, b0, fa, fm, fb, whole, tol, 40);
    }
    if total > 0.0 {
        shift + total.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Terms `(w, ln S_w, √(w/(1-w/n)))` for `0 < w < n` with `S_w > 0`.
fn spectrum_terms(spectrum: &WeightSpectrum) -> Vec<(usize, f64, f64)> {
    let n = spectrum.n() as f64;
    (1..spectrum.n())
        .filter_map(|w| {
            let ls = spectrum.ln_at(w);
            (ls > f64::NEG_INFINITY).then(|| (w, ls, (w as f64 / (1.0 - w as f64 / n)).sqrt()))
        })
        .collect()
}

/// `ln` of the left side of the `r₀` equation after dividing by its right
/// side `B((n-2)/2, 1/2)`: `Σ_{c_w < r} S_w I_{1-c_w²/r²}((n-2)/2, 1/2) / 2`.
pub fn r0_equation_lhs(spectrum: &WeightSpectrum, r: f64) -> f64 {
    let a = (spectrum.n() as f64 - 2.0) / 2.0;
    log_sum_exp(
        spectrum_terms(spectrum)
            .into_iter()
            .filter(|&(_, _, c)| c < r)
            .map(|(_, ls, c)| ls - LN_2 + ln_beta_inc(a, 0.5, 1.0 - (c / r).powi(2))),
    )
}

/// Optimal cone radius at the transmitted point, `r₀ = √n·tan θ`.
pub fn solve_r0(spectrum: &WeightSpectrum) -> Result<f64> {
    let terms = spectrum_terms(spectrum);
    if terms.is_empty() {
        return Err(Error::NoRoot {
            lo: 0.0,
            hi: f64::INFINITY,
            limit: 0.0,
        });
    }
    let lo0 = terms.iter().map(|t| t.2).fold(f64::INFINITY, f64::min);
    let cap = 1e8 * (spectrum.n() as f64).sqrt();
    let mut hi = 2.0 * lo0;
    while r0_equation_lhs(spectrum, hi) < 0.0 {
        hi *= 2.0;
        if hi > cap {
            let limit = log_sum_exp(terms.iter().map(|t| t.1 - LN_2)).exp();
            return Err(Error::NoRoot {
                lo: lo0,
                hi: cap,
                limit,
            });
        }
    }
    let mut lo = lo0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if r0_equation_lhs(spectrum, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `⌊r₀² n / (r₀² + n)⌋`: the largest weight whose bisector plane cuts the
/// cone.
pub fn w0_of(r0: f64, n: usize) -> usize {
    let n = n as f64;
    if r0.is_infinite() {
        return n as usize;
    }
    (r0 * r0 * n / (r0 * r0 + n)).floor() as usize
}

/// Natural log of the tangential-sphere upper bound on the ML frame error
/// probability, with the default quadrature.
pub fn poltyrev_ts_bound(spectrum: &WeightSpectrum, cp: &ChannelPoint) -> Result<f64> {
    poltyrev_ts_bound_with(spectrum, cp, &Quadrature::default())
}

/// Tangential-sphere bound
/// `∫_{-∞}^{√n} (1/σ)φ(x/σ) {Σ_{w≤w₀} S_w Θ_w(x) + P[χ²_{n-1} > r_x²/σ²]} dx + Q(√n/σ)`
/// with `Θ_w(x) = ∫_{β_w(x)}^{r_x} (1/σ)φ(y/σ) P[χ²_{n-2} ≤ (r_x² - y²)/σ²] dy`,
/// `r_x = r₀(1 - x/√n)` and `β_w(x) = (1 - x/√n)√(w/(1-w/n))`.
///
/// When the `r₀` equation has no root the cone is the whole space and the
/// bound collapses to the union bound conditioned on the radial noise.
pub fn poltyrev_ts_bound_with(spectrum: &WeightSpectrum, cp: &ChannelPoint, quad: &Quadrature) -> Result<f64> {
    if spectrum.n() != cp.n {
        return Err(Error::SpectrumLength {
            got: spectrum.n() + 1,
            n: cp.n,
        });
    }
    if cp.n < 4 {
        return Err(Error::InvalidChannel(format!("block length {} below 4", cp.n)));
    }
    let n = cp.n as f64;
    let sq = n.sqrt();
    let s = cp.sigma;
    let r0 = match solve_r0(spectrum) {
        Ok(r) => r,
        Err(Error::NoRoot { .. }) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let w0 = w0_of(r0, cp.n);
    let terms: Vec<(usize, f64, f64)> = spectrum_terms(spectrum).into_iter().filter(|t| t.0 <= w0).collect();
    let ln_dens = |v: f64| ln_normal_pdf(v / s) - s.ln();

    let bracket = |x: f64| -> f64 {
        let scale = 1.0 - x / sq;
        if r0.is_infinite() {
            return log_sum_exp(terms.iter().map(|&(_, ls, c)| ls + ln_q_func(scale * c / s)));
        }
        let rx = r0 * scale;
        let outside = chi2_sf_log(n - 1.0, rx * rx / s / s);
        let inner = |y: f64| ln_dens(y) + ln_gamma_p((n - 2.0) / 2.0, (rx * rx - y * y).max(0.0) / s / s / 2.0);
        // Θ_w(x) = H(β_w): integrate the w-independent integrand between
        // consecutive lower limits and accumulate from the top.
        let betas: Vec<f64> = terms.iter().map(|t| (scale * t.2).min(rx)).collect();
        let seg = Quadrature {
            panels: (quad.panels / 16).max(2),
            ..*quad
        };
        let mut acc = f64::NEG_INFINITY;
        let mut upper = rx;
        let mut sum = f64::NEG_INFINITY;
        for (idx, &(_, ls, _)) in terms.iter().enumerate().rev() {
            let b = betas[idx];
            acc = log_add(acc, log_integrate(&inner, b, upper, &seg));
            upper = b;
            sum = log_add(sum, ls + acc);
        }
        log_add(sum, outside)
    };

    let reach = s * (2.0 * 80.0f64).sqrt() * 2.0;
    let (lo, hi) = (-reach, reach.min(sq));
    let outer = |x: f64| ln_dens(x) + bracket(x);
    let integral = log_integrate(&outer, lo, hi, quad);
    let total = log_add(integral, ln_q_func(sq / s));
    Ok(total.min(0.0))
}

/// Union bound `Σ_w S_w Q(√w / σ)`, in log form.
pub fn union_bound(spectrum: &WeightSpectrum, cp: &ChannelPoint) -> f64 {
    log_sum_exp((1..=spectrum.n()).map(|w| spectrum.ln_at(w) + ln_q_func((w as f64).sqrt() / cp.sigma)))
}

/// One row of a bound curve (base-10 logs).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundPoint {
    pub snr_db: f64,
    pub log10_lower: f64,
    pub log10_upper: f64,
}

/// Shannon and tangential-sphere bounds over an SNR grid, evaluated in
/// parallel and returned in grid order.
pub fn bound_curve(spectrum: &WeightSpectrum, rate: f64, snrs: &[f64]) -> Result<Vec<BoundPoint>> {
    let to10 = 1.0 / std::f64::consts::LN_10;
    snrs.par_iter()
        .map(|&snr| {
            let cp = ChannelPoint::new(spectrum.n(), rate, snr)?;
            Ok(BoundPoint {
                snr_db: snr,
                log10_lower: shannon_lower_bound(&cp)? * to10,
                log10_upper: poltyrev_ts_bound(spectrum, &cp)? * to10,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hamming() -> WeightSpectrum {
        let mut c = vec![0.0; 9];
        c[0] = 1.0;
        c[4] = 14.0;
        c[8] = 1.0;
        WeightSpectrum::from_counts(&c).unwrap()
    }

    #[test]
    fn g_is_one_at_right_angle() {
        for s in [0.3, 1.0, 2.5] {
            assert!((shannon_g(PI / 2.0, s) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exponent_has_double_zero_at_noise_angle() {
        let s = 0.8f64;
        let t = s.atan();
        assert!(shannon_exponent(t, s).abs() < 1e-14);
        for d in [-0.05, -0.01, 0.01, 0.05] {
            assert!(shannon_exponent(t + d, s) > 0.0);
        }
    }

    #[test]
    fn cone_angle_closed_form_n4() {
        let t = solve_cone_half_angle(4, 0.5);
        assert!(((t - t.sin() * t.cos()) / PI - 0.25).abs() < 1e-12);
        assert_eq!(solve_cone_half_angle(10, 0.0), PI);
        let mut prev = PI;
        for r in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let t = solve_cone_half_angle(64, r);
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn shannon_decreasing() {
        let mut prev = 1.0;
        for i in 0..=16 {
            let cp = ChannelPoint::new(2048, 0.5, 0.25 * i as f64).unwrap();
            let v = shannon_lower_bound(&cp).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn approximation_below_exact_sphere_packing() {
        // Reference values from an independent scipy quadrature.
        for &(n, snr, exact) in &[
            (128, 0.0, -0.48310021028988565),
            (128, 4.0, -8.63829376531731),
            (512, 2.0, -6.657223891700481),
        ] {
            let cp = ChannelPoint::new(n, 0.5, snr).unwrap();
            let e = sphere_packing_exact(&cp).unwrap() / std::f64::consts::LN_10;
            assert!((e - exact).abs() < 1e-6 * exact.abs().max(1.0), "{n} {snr}: {e}");
            assert!(shannon_lower_bound(&cp).unwrap() / std::f64::consts::LN_10 <= e);
        }
    }

    #[test]
    fn r0_matches_grid_scan() {
        let s = hamming();
        let r0 = solve_r0(&s).unwrap();
        // Dense scan for the sign change of the left side.
        let mut prev = None;
        let mut found = None;
        let mut r = 1.0;
        while r < 10.0 {
            let v = r0_equation_lhs(&s, r);
            if let Some(p) = prev {
                if p < 0.0 && v >= 0.0 {
                    found = Some(r);
                    break;
                }
            }
            prev = Some(v);
            r += 1e-6;
        }
        let g = found.unwrap();
        assert!((g - r0).abs() <= 1e-6 * r0 + 1e-6, "{g} vs {r0}");
    }

    #[test]
    fn doubling_spectrum_shrinks_r0() {
        let s = hamming();
        let d = WeightSpectrum::from_log(
            s.log_coeffs()
                .iter()
                .enumerate()
                .map(|(w, &x)| if w == 0 { 0.0 } else { x + LN_2 })
                .collect(),
        )
        .unwrap();
        assert!(solve_r0(&d).unwrap() < solve_r0(&s).unwrap());
    }

    #[test]
    fn empty_spectrum_has_no_root_but_a_positive_bound() {
        let mut c = vec![f64::NEG_INFINITY; 17];
        c[0] = 0.0;
        let s = WeightSpectrum::from_log(c).unwrap();
        assert!(matches!(solve_r0(&s), Err(Error::NoRoot { .. })));
        let cp = ChannelPoint::new(16, 0.5, 3.0).unwrap();
        let b = poltyrev_ts_bound(&s, &cp).unwrap();
        assert!(b > f64::NEG_INFINITY && b <= 0.0);
    }

    #[test]
    fn hamming_bounds_ordered() {
        let s = hamming();
        for snr in [2.0, 4.0, 6.0] {
            let cp = ChannelPoint::new(8, 0.5, snr).unwrap();
            let ts = poltyrev_ts_bound(&s, &cp).unwrap();
            let ub = union_bound(&s, &cp);
            assert!(ts <= ub.max(0.0) + 1e-9, "snr {snr}: ts {ts} ub {ub}");
            let fine = poltyrev_ts_bound_with(&s, &cp, &Quadrature::default().refined()).unwrap();
            assert!(((fine - ts) / ts).abs() < 1e-6 || (fine.exp() - ts.exp()).abs() < 1e-6 * ts.exp());
        }
    }

    #[test]
    fn rejects_length_mismatch() {
        let cp = ChannelPoint::new(16, 0.5, 1.0).unwrap();
        assert!(matches!(
            poltyrev_ts_bound(&hamming(), &cp),
            Err(Error::SpectrumLength { .. })
        ));
        assert!(ChannelPoint::new(16, 1.0, 1.0).is_err());
    }
}
