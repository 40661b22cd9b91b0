//! Acceptance suite: one `[PASS]` or `[FAIL]` line per criterion.
//!
//! Runs everything by default; `cargo test -p nbqc-core --test acceptance -- 3 9`
//! runs only the listed criteria (criterion 11 pulls in 6 and 9 as needed).
//! `NBQC_WORKERS` sets the simulation thread count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng as _;
use rand_distr::StandardNormal;

use nbqc::anneal::{construct_base, default_step1_t0, EnergyParams, SaConfig, DEFAULT_STEP2_T0, DEFAULT_T_END};
use nbqc::bounds::{poltyrev_ts_bound, shannon_lower_bound, sigma_from_snr, union_bound};
use nbqc::formats::{fer_csv, MatrixFile};
use nbqc::graph::{dp_walk_counts, incidence_to_base, tanner_girth, Hypergraph};
use nbqc::labeler::{
    base_cycle_counts, candidates_for_base, generalized_girth, label_coefficients, lifted_cycle_counts,
    optimize_degrees, LabelOptions,
};
use nbqc::sim::{expand_qc, run_fer};
use nbqc::spectrum::{ensemble_avg_spectrum, strip_genfun_binary, strip_genfun_nb};
use nbqc::{
    seed, BinaryMatrix, ChannelPoint, CodeMatrices, EnsembleSpec, FerConfig, GfContext, IntMatrix, WeightSpectrum,
};

const SEED: u64 = 20_240_607;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(pass: bool, detail: String, elapsed: Duration, budget_s: u64) -> Outcome {
    let in_time = elapsed.as_secs_f64() < budget_s as f64;
    let mut detail = format!("{detail}; {:.1} s (budget {budget_s} s)", elapsed.as_secs_f64());
    if !in_time {
        detail.push_str(" OVER BUDGET");
    }
    outcome(pass && in_time, detail)
}

fn workers() -> usize {
    std::env::var("NBQC_WORKERS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn rel_close(ln_a: f64, ln_b: f64, tol: f64) -> bool {
    if ln_a == f64::NEG_INFINITY || ln_b == f64::NEG_INFINITY {
        return ln_a == ln_b;
    }
    (ln_a - ln_b).exp_m1().abs() <= tol
}

// ---------------------------------------------------------------- criterion 1

/// Label-averaged count of q-ary words satisfying one strip, by binary-image
/// weight. Strip rows are `r = 0..M`; row `r` checks columns `b·M + r` for the
/// first `kj` blocks. Each word's probability is the product over rows of the
/// fraction of that row's label tuples it satisfies (rows share no labels).
/// Also returns the per-word probabilities indexed by binary image.
fn strip_oracle(ctx: &GfContext, k: usize, kj: usize, m_rows: usize) -> (Vec<f64>, Vec<f64>) {
    let q = ctx.q();
    let m = ctx.m() as usize;
    let n = k * m_rows;
    let labels: Vec<Vec<u16>> = {
        let mut all = vec![Vec::new()];
        for _ in 0..kj {
            all = all
                .into_iter()
                .flat_map(|v: Vec<u16>| (1..q as u16).map(move |a| [v.clone(), vec![a]].concat()))
                .collect();
        }
        all
    };
    let mut by_weight = vec![0.0; n * m + 1];
    let mut by_image = vec![0.0; 1 << (n * m)];
    let mut word = vec![0u16; n];
    for idx in 0..q.pow(n as u32) {
        let mut t = idx;
        for s in word.iter_mut() {
            *s = (t % q) as u16;
            t /= q;
        }
        let mut p = 1.0;
        for r in 0..m_rows {
            let ok = labels
                .iter()
                .filter(|lab| (0..kj).fold(0, |acc, b| acc ^ ctx.mul(lab[b], word[b * m_rows + r])) == 0)
                .count();
            p *= ok as f64 / labels.len() as f64;
            if p == 0.0 {
                break;
            }
        }
        let w: usize = word.iter().map(|s| s.count_ones() as usize).sum();
        by_weight[w] += p;
        if n * m <= 16 {
            let bits = ctx.expand_bits(&word);
            let image = bits
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &b)| acc | (usize::from(b) << i));
            by_image[image] = p;
        }
    }
    (by_weight, by_image)
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut cache: BTreeMap<(usize, usize, usize, u32), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut checked = 0;
    let mut literal = 0;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for m in 1..=2u32 {
        let ctx = GfContext::new(m, None).unwrap();
        for m_rows in 1..=2 {
            for k in 1..=4 {
                let mut shapes: Vec<Vec<usize>> = (1..=k).map(|a| vec![a]).collect();
                for a in 1..=k {
                    for b in 1..=k {
                        shapes.push(vec![a, b]);
                    }
                }
                for weights in shapes {
                    let spec = EnsembleSpec::new(k, weights.clone(), m_rows, m).unwrap();
                    let nb = spec.binary_len();
                    let strips: Vec<(Vec<f64>, Vec<f64>)> = weights
                        .iter()
                        .map(|&kj| {
                            cache
                                .entry((k, kj, m_rows, m))
                                .or_insert_with(|| strip_oracle(&ctx, k, kj, m_rows))
                                .clone()
                        })
                        .collect();
                    // Strips after the first are bit-permuted uniformly at random.
                    let mut oracle: Vec<f64> = (0..=nb)
                        .map(|w| {
                            strips[1..]
                                .iter()
                                .fold(strips[0].0[w], |acc, s| acc * s.0[w] / binom(nb, w))
                        })
                        .collect();
                    if weights.len() == 2 && nb <= 6 {
                        let perms = permutations(nb);
                        let mut lit = vec![0.0; nb + 1];
                        for perm in &perms {
                            for b in 0..1usize << nb {
                                let pb = (0..nb).fold(0, |acc, i| acc | ((b >> i & 1) << perm[i]));
                                lit[b.count_ones() as usize] += strips[0].1[b] * strips[1].1[pb];
                            }
                        }
                        for (w, v) in lit.iter_mut().enumerate() {
                            *v /= perms.len() as f64;
                            if (*v - oracle[w]).abs() > 1e-12 * oracle[w].max(1e-300) {
                                failures.push(format!("{spec:?}: permutation average disagrees at w={w}"));
                            }
                        }
                        literal += 1;
                        oracle = lit;
                    }
                    let got = ensemble_avg_spectrum(&spec);
                    for (w, &o) in oracle.iter().enumerate() {
                        let l = got.ln_at(w);
                        let ok = if o == 0.0 {
                            l == f64::NEG_INFINITY
                        } else {
                            let e = (l - o.ln()).exp_m1().abs();
                            worst = worst.max(e);
                            e <= 1e-9
                        };
                        if !ok {
                            failures.push(format!("{spec:?} w={w}: formula {} vs oracle {o}", l.exp()));
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{checked} ensembles ({literal} with literal permutation enumeration), max rel err {worst:.2e}")
    } else {
        format!("{} mismatches, first: {}", failures.len(), failures[0])
    };
    within(failures.is_empty(), detail, start.elapsed(), 60)
}

// ---------------------------------------------------------------- criterion 2

fn ipoly_mul(a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn ipoly_pow(p: &[i128], e: usize) -> Vec<i128> {
    (0..e).fold(vec![1], |acc, _| ipoly_mul(&acc, p))
}

fn ibinom(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
}

/// `g(s)^M` with `g = (1+s)^{K-K_i} · even part of (1+s)^{K_i}`.
fn binary_strip_exact(k: usize, ki: usize, m_rows: usize) -> Vec<i128> {
    let even: Vec<i128> = (0..=ki).map(|t| if t % 2 == 0 { ibinom(ki, t) } else { 0 }).collect();
    let pad: Vec<i128> = (0..=k - ki).map(|t| ibinom(k - ki, t)).collect();
    ipoly_pow(&ipoly_mul(&pad, &even), m_rows)
}

/// The nonbinary strip formula `f(φ(s))^M` evaluated in integers for `q = 2^m`.
fn nonbinary_strip_exact(k: usize, kj: usize, m_rows: usize, m: u32) -> Vec<i128> {
    let q = 1i128 << m;
    let check: Vec<i128> = (0..=kj)
        .map(|t| {
            let sign = if t % 2 == 0 { 1 } else { -1 };
            let num = ibinom(kj, t) * ((q - 1).pow(t as u32) + sign * (q - 1));
            assert_eq!(num % q, 0);
            num / q
        })
        .collect();
    let pad: Vec<i128> = (0..=k - kj)
        .map(|t| ibinom(k - kj, t) * (q - 1).pow(t as u32))
        .collect();
    let f = ipoly_mul(&pad, &check);
    let mut phi: Vec<i128> = (0..=m as usize).map(|i| ibinom(m as usize, i)).collect();
    phi[0] -= 1;
    for c in phi.iter_mut() {
        assert_eq!(*c % (q - 1), 0);
        *c /= q - 1;
    }
    let mut out = vec![0i128; k * m as usize + 1];
    let mut phi_t = vec![1i128];
    for (t, &c) in f.iter().enumerate() {
        if t > 0 {
            phi_t = ipoly_mul(&phi_t, &phi);
        }
        for (w, &v) in phi_t.iter().enumerate() {
            out[w] += c * v;
        }
    }
    ipoly_pow(&out, m_rows)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for k in 1..=6 {
        for m_rows in 1..=5 {
            for ki in 1..=k {
                let bin = binary_strip_exact(k, ki, m_rows);
                if bin != nonbinary_strip_exact(k, ki, m_rows, 1) {
                    failures.push(format!("closed forms differ at K={k}, K_i={ki}, M={m_rows}"));
                }
                let a = strip_genfun_binary(k, ki, m_rows);
                let b = strip_genfun_nb(k, ki, m_rows, 1);
                if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| x.to_bits() != y.to_bits()) {
                    failures.push(format!(
                        "computed strip polynomials differ at K={k}, K_i={ki}, M={m_rows}"
                    ));
                }
                for (w, &c) in bin.iter().enumerate() {
                    let ok = if c == 0 {
                        a[w] == f64::NEG_INFINITY
                    } else {
                        rel_close(a[w], (c as f64).ln(), 1e-12)
                    };
                    if !ok {
                        failures.push(format!(
                            "K={k}, K_i={ki}, M={m_rows}, w={w}: {} vs exact {c}",
                            a[w].exp()
                        ));
                    }
                }
            }
            for weights in [vec![k, k], vec![k, (k + 1) / 2], vec![k, k, k.max(2) - 1]] {
                let spec = EnsembleSpec::new(k, weights.clone(), m_rows, 1).unwrap();
                let got = ensemble_avg_spectrum(&spec);
                let nb = spec.binary_len();
                let polys: Vec<Vec<f64>> = weights.iter().map(|&kj| strip_genfun_nb(k, kj, m_rows, 1)).collect();
                for w in 1..=nb {
                    let prod: f64 = polys.iter().map(|p| p[w]).sum();
                    let want = if prod == f64::NEG_INFINITY {
                        prod
                    } else {
                        (1.0 - weights.len() as f64) * nbqc::special::ln_binomial(nb as f64, w as f64) + prod
                    };
                    if got.ln_at(w).to_bits() != want.to_bits() {
                        failures.push(format!("{spec:?} w={w}: {} vs {want}", got.ln_at(w)));
                    }
                }
                checked += 1;
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("exact integer identity and bitwise agreement on 105 strips and {checked} ensembles")
    } else {
        format!("{} mismatches, first: {}", failures.len(), failures[0])
    };
    within(failures.is_empty(), detail, start.elapsed(), 60)
}

// ---------------------------------------------------------------- criterion 3

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let spec = EnsembleSpec::from_length(2, 4, 2184, 6).unwrap();
    let s = ensemble_avg_spectrum(&spec);
    let d = s.typical_min_distance();
    let pass = d.is_some_and(|d| (40..=60).contains(&d));
    let detail = format!(
        "(2,4) GF(64), M={}, binary length {}: typical minimum distance {:?}",
        spec.m_rows,
        spec.binary_len(),
        d
    );
    within(pass, detail, start.elapsed(), 300)
}

// ---------------------------------------------------------------- criterion 4

fn hamming_codewords() -> Vec<[u8; 8]> {
    let g: [[u8; 8]; 4] = [
        [1, 0, 0, 0, 0, 1, 1, 1],
        [0, 1, 0, 0, 1, 0, 1, 1],
        [0, 0, 1, 0, 1, 1, 0, 1],
        [0, 0, 0, 1, 1, 1, 1, 0],
    ];
    (0..16u32)
        .map(|u| {
            let mut c = [0u8; 8];
            for (i, row) in g.iter().enumerate() {
                if u >> i & 1 == 1 {
                    for j in 0..8 {
                        c[j] ^= row[j];
                    }
                }
            }
            c
        })
        .collect()
}

/// Frame errors of exhaustive 16-codeword correlation decoding.
fn ml_errors(snr_db: f64, frames: u64, seed: u64) -> u64 {
    let words: Vec<[f64; 8]> = hamming_codewords()
        .iter()
        .map(|c| c.map(|b| 1.0 - 2.0 * f64::from(b)))
        .collect();
    let sigma = sigma_from_snr(0.5, snr_db);
    let mut rng = seed::rng(seed);
    let mut errors = 0u64;
    let mut y = [0.0; 8];
    for _ in 0..frames {
        let sent = rng.random_range(0..16);
        for (v, x) in y.iter_mut().zip(&words[sent]) {
            *v = x + sigma * rng.sample::<f64, _>(StandardNormal);
        }
        let corr = |c: &[f64; 8]| -> f64 { c.iter().zip(&y).map(|(a, b)| a * b).sum() };
        let own = corr(&words[sent]);
        if words.iter().enumerate().any(|(i, w)| i != sent && corr(w) > own) {
            errors += 1;
        }
    }
    errors
}

/// 10^5 frames cannot resolve the bound at high SNR, where it sits within a
/// few percent of the ML error rate; the decision uses this many frames and
/// the 10^5-frame comparison is reported alongside.
const ML_FRAMES: u64 = 40_000_000;

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let words = hamming_codewords();
    let mut counts = [0.0; 9];
    for c in &words {
        counts[c.iter().map(|&b| b as usize).sum::<usize>()] += 1.0;
    }
    assert_eq!(counts, [1.0, 0.0, 0.0, 0.0, 14.0, 0.0, 0.0, 0.0, 1.0]);
    let spectrum = WeightSpectrum::from_counts(&counts).unwrap();
    let base = seed::derive(SEED, "acceptance.ml");
    let mut pass = true;
    let mut rows = Vec::new();
    for (i, snr) in (2..=6).enumerate() {
        let snr = snr as f64;
        let cp = ChannelPoint::new(8, 0.5, snr).unwrap();
        let ts = poltyrev_ts_bound(&spectrum, &cp).unwrap().exp();
        let ub = union_bound(&spectrum, &cp).exp();
        let e = ml_errors(snr, ML_FRAMES, seed::derive_indexed(base, i as u64));
        let mc = e as f64 / ML_FRAMES as f64;
        let sd = (e as f64).sqrt() / ML_FRAMES as f64;
        let short = ml_errors(snr, 100_000, seed::derive_indexed(base, 100 + i as u64)) as f64 / 1e5;
        let ok = ts >= mc && (ub > 1.0 || ts <= ub);
        pass &= ok;
        rows.push(format!(
            "{snr} dB: ML {mc:.4e} (sd {sd:.1e}; 1e5 frames {short:.2e}{}) <= TS {ts:.4e} <= UB {ub:.4e}{}",
            if short > ts { ", above TS" } else { "" },
            if ok { "" } else { " VIOLATED" }
        ));
    }
    within(pass, rows.join("; "), start.elapsed(), 600)
}

// ---------------------------------------------------------------- criterion 5

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [128usize, 512] {
        let spectrum = WeightSpectrum::binomial(n, 0.5);
        let mut min_gap = f64::INFINITY;
        for i in 0..=16 {
            let snr = 0.25 * i as f64;
            let cp = ChannelPoint::new(n, 0.5, snr).unwrap();
            let lo = shannon_lower_bound(&cp).unwrap();
            let hi = poltyrev_ts_bound(&spectrum, &cp).unwrap();
            min_gap = min_gap.min((hi - lo) / std::f64::consts::LN_10);
            if lo > hi {
                pass = false;
            }
        }
        parts.push(format!("n={n}: min log10 gap (TS - Shannon) {min_gap:.3}"));
    }
    within(pass, parts.join(", "), start.elapsed(), 600)
}

// ---------------------------------------------------------------- criterion 6

fn sa_run(c3: usize, run: u64) -> Hypergraph {
    let s = seed::derive_indexed(seed::derive(SEED, "acceptance.sa"), c3 as u64 * 1000 + run);
    let cfg1 = SaConfig::new(10_000, default_step1_t0(c3), DEFAULT_T_END, seed::derive(s, "step1")).unwrap();
    let cfg2 = SaConfig::new(10_000, DEFAULT_STEP2_T0, DEFAULT_T_END, seed::derive(s, "step2")).unwrap();
    construct_base(26, 52 - c3, c3, &cfg1, &cfg2, &EnergyParams::default()).unwrap()
}

/// Returns the outcome and the concatenated base files.
fn criterion_6() -> (Outcome, String) {
    let start = Instant::now();
    let mut artifacts = String::new();
    let mut pass = true;
    let mut parts = Vec::new();
    for c3 in [0usize, 10, 15, 20] {
        let mut girth_ok = 0;
        let mut girths = BTreeMap::new();
        let mut broken = 0;
        for run in 0..10 {
            let h = sa_run(c3, run);
            let b = incidence_to_base(&h);
            artifacts.push_str(&MatrixFile::base(&b).render());
            let mut hist = BTreeMap::from([(2usize, 52 - c3)]);
            if c3 > 0 {
                hist.insert(3, c3);
            }
            let valid = h.validate().is_ok()
                && h.edge_size_histogram() == hist
                && h.hamiltonian().len() == 26
                && h.hamiltonian_order().is_some_and(|o| o.len() == 26)
                && CodeMatrices::unlabeled(b.clone(), 1, 1).unwrap().is_encoder_form();
            if !valid {
                broken += 1;
            }
            let g = tanner_girth(&b, 12);
            *girths
                .entry(g.map_or(">12".to_string(), |g| g.to_string()))
                .or_insert(0) += 1;
            if valid && g.is_none_or(|g| g >= 6) {
                girth_ok += 1;
            }
        }
        pass &= broken == 0 && girth_ok >= 8;
        parts.push(format!("c3={c3}: {girth_ok}/10 girth>=6 {girths:?}, {broken} invalid"));
    }
    (within(pass, parts.join("; "), start.elapsed(), 900), artifacts)
}

// ---------------------------------------------------------------- criterion 7

/// Simple cycles by hyperedge-step length, by walking the incidence graph
/// from each cycle's smallest vertex (both directions, halved afterwards).
fn brute_force_cycles(n: usize, edges: &[Vec<usize>], l_max: usize) -> BTreeMap<usize, u64> {
    fn walk(
        start: usize,
        v: usize,
        len: usize,
        l_max: usize,
        edges: &[Vec<usize>],
        used_v: &mut [bool],
        used_e: &mut [bool],
        out: &mut BTreeMap<usize, u64>,
    ) {
        for (ei, e) in edges.iter().enumerate() {
            if used_e[ei] || !e.contains(&v) {
                continue;
            }
            used_e[ei] = true;
            for &w in e {
                if w == v {
                    continue;
                }
                if w == start && len + 1 >= 2 {
                    *out.entry(len + 1).or_insert(0) += 1;
                } else if w > start && !used_v[w] && len + 1 < l_max {
                    used_v[w] = true;
                    walk(start, w, len + 1, l_max, edges, used_v, used_e, out);
                    used_v[w] = false;
                }
            }
            used_e[ei] = false;
        }
    }
    let mut out = BTreeMap::new();
    for s in 0..n {
        let mut used_v = vec![false; n];
        let mut used_e = vec![false; edges.len()];
        used_v[s] = true;
        walk(s, s, 0, l_max, edges, &mut used_v, &mut used_e, &mut out);
    }
    out.into_iter().map(|(l, c)| (l, c / 2)).collect()
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = seed::rng_for(SEED, "acceptance.dp");
    let mut cyclic = 0;
    let mut failures = Vec::new();
    for g in 0..200 {
        let n = rng.random_range(3..=8usize);
        let n_edges = rng.random_range(2..=12usize);
        let edges: Vec<Vec<usize>> = (0..n_edges)
            .map(|_| {
                let size = if n >= 3 && rng.random_bool(0.3) { 3 } else { 2 };
                let mut e = Vec::new();
                while e.len() < size {
                    let v = rng.random_range(0..n);
                    if !e.contains(&v) {
                        e.push(v);
                    }
                }
                e
            })
            .collect();
        let h = Hypergraph::from_raw(n, edges, Vec::new());
        let brute = brute_force_cycles(n, h.edges(), 8);
        let dp = dp_walk_counts(&h, 8);
        match brute.iter().next() {
            Some((&girth, &count)) => {
                cyclic += 1;
                let shorter = (2..girth).all(|l| dp.get(l) == 0);
                if !shorter || dp.get(girth) != 2 * girth as u128 * u128::from(count) {
                    failures.push(format!(
                        "graph {g}: girth {girth}, {count} cycles, dp {}",
                        dp.get(girth)
                    ));
                }
            }
            None => {
                if !dp.is_empty() {
                    failures.push(format!("graph {g}: acyclic but dp reports {:?}", dp.shortest()));
                }
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("200 graphs ({cyclic} with cycles) agree")
    } else {
        format!("{} mismatches, first: {}", failures.len(), failures[0])
    };
    within(failures.is_empty(), detail, start.elapsed(), 60)
}

// ---------------------------------------------------------------- criterion 8

struct Lifted {
    /// Nonzero entries per lifted check: (variable, coefficient, base position).
    rows: Vec<Vec<(usize, u16, (usize, usize))>>,
    n_vars: usize,
}

fn lift(cm: &CodeMatrices, ctx: &GfContext) -> Lifted {
    let (b, l) = (cm.base(), cm.lifting());
    let mut rows = vec![Vec::new(); b.rows() * l];
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            let w = cm.degrees().get(i, j);
            if w < 0 {
                continue;
            }
            let coef = ctx.exp(i64::from(cm.coeffs().get(i, j)));
            for r in 0..l {
                rows[i * l + r].push((j * l + (r + w as usize) % l, coef, (i, j)));
            }
        }
    }
    Lifted {
        rows,
        n_vars: b.cols() * l,
    }
}

#[derive(Default)]
struct LiftedCensus {
    all: BTreeMap<usize, u128>,
    nonbinary: BTreeMap<usize, u128>,
    /// Nonbinary cycles whose projection visits distinct base rows and columns.
    single_lap: BTreeMap<usize, u128>,
}

/// Every simple cycle of the lifted Tanner graph up to `g_cap`, each found
/// twice (once per direction) from its smallest check.
fn lifted_census(lf: &Lifted, ctx: &GfContext, g_cap: usize) -> LiftedCensus {
    let n_checks = lf.rows.len();
    let mut cols: Vec<Vec<(usize, u16, (usize, usize))>> = vec![Vec::new(); lf.n_vars];
    for (c, row) in lf.rows.iter().enumerate() {
        for &(v, coef, pos) in row {
            cols[v].push((c, coef, pos));
        }
    }
    struct Ctx<'a> {
        lf: &'a Lifted,
        cols: &'a [Vec<(usize, u16, (usize, usize))>],
        gf: &'a GfContext,
        k_max: usize,
        used_c: Vec<bool>,
        used_v: Vec<bool>,
        positions: Vec<(usize, usize)>,
        coefs: Vec<u16>,
        census: LiftedCensus,
    }
    fn from_check(x: &mut Ctx<'_>, start: usize, c: usize) {
        for &(v, coef, pos) in &x.lf.rows[c] {
            if x.used_v[v] {
                continue;
            }
            x.used_v[v] = true;
            x.positions.push(pos);
            x.coefs.push(coef);
            for &(c2, coef2, pos2) in &x.cols[v] {
                if c2 == c {
                    continue;
                }
                x.positions.push(pos2);
                x.coefs.push(coef2);
                let k = x.positions.len() / 2;
                if c2 == start {
                    record(x);
                } else if c2 > start && !x.used_c[c2] && k < x.k_max {
                    x.used_c[c2] = true;
                    from_check(x, start, c2);
                    x.used_c[c2] = false;
                }
                x.positions.pop();
                x.coefs.pop();
            }
            x.positions.pop();
            x.coefs.pop();
            x.used_v[v] = false;
        }
    }
    fn record(x: &mut Ctx<'_>) {
        let len = x.positions.len();
        let odd = x.coefs.iter().step_by(2).fold(1, |a, &b| x.gf.mul(a, b));
        let even = x.coefs.iter().skip(1).step_by(2).fold(1, |a, &b| x.gf.mul(a, b));
        *x.census.all.entry(len).or_insert(0) += 1;
        if odd == even {
            *x.census.nonbinary.entry(len).or_insert(0) += 1;
            let mut rows: Vec<usize> = x.positions.iter().step_by(2).map(|p| p.0).collect();
            let mut cols: Vec<usize> = x.positions.iter().step_by(2).map(|p| p.1).collect();
            rows.sort_unstable();
            rows.dedup();
            cols.sort_unstable();
            cols.dedup();
            if rows.len() == len / 2 && cols.len() == len / 2 {
                *x.census.single_lap.entry(len).or_insert(0) += 1;
            }
        }
    }
    let mut x = Ctx {
        lf,
        cols: &cols,
        gf: ctx,
        k_max: g_cap / 2,
        used_c: vec![false; n_checks],
        used_v: vec![false; lf.n_vars],
        positions: Vec::new(),
        coefs: Vec::new(),
        census: LiftedCensus::default(),
    };
    for s in 0..n_checks {
        x.used_c[s] = true;
        from_check(&mut x, s, s);
        x.used_c[s] = false;
    }
    let halve = |m: BTreeMap<usize, u128>| m.into_iter().map(|(k, v)| (k, v / 2)).collect();
    LiftedCensus {
        all: halve(x.census.all),
        nonbinary: halve(x.census.nonbinary),
        single_lap: halve(x.census.single_lap),
    }
}

fn random_fixture(rng: &mut seed::Rng, lifting: usize, m: u32) -> CodeMatrices {
    let q1 = (1i32 << m) - 1;
    let mut rows = vec![vec![0u8; 8]; 4];
    for j in 0..8 {
        let wt = rng.random_range(2..=3);
        let mut picked = Vec::new();
        while picked.len() < wt {
            let r = rng.random_range(0..4);
            if !picked.contains(&r) {
                picked.push(r);
            }
        }
        for r in picked {
            rows[r][j] = 1;
        }
    }
    let base = BinaryMatrix::from_rows(&rows);
    let mut degrees = IntMatrix::filled(4, 8, -1);
    let mut coeffs = IntMatrix::filled(4, 8, -1);
    for i in 0..4 {
        for j in 0..8 {
            if rows[i][j] == 1 {
                degrees.set(i, j, rng.random_range(0..lifting as i32));
                coeffs.set(i, j, rng.random_range(0..q1));
            }
        }
    }
    CodeMatrices::new(base, degrees, coeffs, lifting, m).unwrap()
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let g_cap = 10;
    let mut rng = seed::rng_for(SEED, "acceptance.girth");
    let mut failures = Vec::new();
    let mut fixtures = 0;
    let mut with_cycles = 0;
    for lifting in 1..=4 {
        for m in 1..=3u32 {
            let ctx = GfContext::new(m, None).unwrap();
            for f in 0..6 {
                let cm = random_fixture(&mut rng, lifting, m);
                let census = lifted_census(&lift(&cm, &ctx), &ctx, g_cap);
                let tag = format!("L={lifting} m={m} fixture {f}");
                if lifted_cycle_counts(&cm, &ctx, g_cap, true) != census.all {
                    failures.push(format!("{tag}: lifted cycle counts differ"));
                }
                if lifted_cycle_counts(&cm, &ctx, g_cap, false) != census.nonbinary {
                    failures.push(format!("{tag}: nonbinary cycle counts differ"));
                }
                let want = census
                    .nonbinary
                    .iter()
                    .next()
                    .map_or((None, 0), |(&g, &c)| (Some(g), c));
                if generalized_girth(&cm, &ctx, g_cap) != want {
                    failures.push(format!(
                        "{tag}: generalized girth {:?} vs {want:?}",
                        generalized_girth(&cm, &ctx, g_cap)
                    ));
                }
                let per_base: BTreeMap<usize, u128> = base_cycle_counts(&cm, &ctx, g_cap)
                    .into_iter()
                    .filter(|&(_, c)| c > 0)
                    .map(|(g, c)| (g, c * lifting as u128))
                    .collect();
                if per_base != census.single_lap {
                    failures.push(format!(
                        "{tag}: L x base (C1,C3) counts {per_base:?} vs single-lap {:?}",
                        census.single_lap
                    ));
                }
                fixtures += 1;
                if !census.nonbinary.is_empty() {
                    with_cycles += 1;
                }
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{fixtures} fixtures ({with_cycles} with nonbinary cycles <= {g_cap}) agree exactly")
    } else {
        format!("{} mismatches, first: {}", failures.len(), failures[0])
    };
    within(failures.is_empty(), detail, start.elapsed(), 120)
}

// ---------------------------------------------------------------- criterion 9

const PIPELINE_SNRS: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];
/// Per-point frame cap that keeps the five-point run inside its time budget.
const PIPELINE_MAX_FRAMES: u64 = 10_000_000;

/// Returns the outcome and the written artifacts (base, degree and
/// coefficient files, FER CSV).
fn criterion_9(workers: usize) -> (Outcome, String) {
    let start = Instant::now();
    let s = seed::derive(SEED, "acceptance.pipeline");
    let (c2, c3) = (11, 1);
    let cfg1 = SaConfig::new(10_000, default_step1_t0(c3), DEFAULT_T_END, seed::derive(s, "step1")).unwrap();
    let cfg2 = SaConfig::new(10_000, DEFAULT_STEP2_T0, DEFAULT_T_END, seed::derive(s, "step2")).unwrap();
    let h = construct_base(6, c2, c3, &cfg1, &cfg2, &EnergyParams::default()).unwrap();
    let base = incidence_to_base(&h);
    let (lifting, m) = (4, 4);
    let ctx = GfContext::new(m, None).unwrap();
    let degrees = optimize_degrees(&base, lifting, seed::derive(s, "degrees"), 10).unwrap();
    let cands = candidates_for_base(&ctx, &base, 50, seed::derive(s, "candidates")).unwrap();
    let opts = LabelOptions {
        seed: seed::derive(s, "coeffs"),
        ..LabelOptions::default()
    };
    let lab = label_coefficients(&ctx, &base, &degrees, lifting, &cands, &opts).unwrap();
    let code = expand_qc(&lab.code, &ctx).unwrap();
    let cfg = FerConfig {
        target_errors: 100,
        max_frames: PIPELINE_MAX_FRAMES,
        max_iter: 50,
        seed: seed::derive(s, "simulate"),
        workers,
        random_info: true,
    };
    let report = run_fer(&code, &PIPELINE_SNRS, &cfg).unwrap();
    let mut artifacts = MatrixFile::base(&base).render();
    artifacts.push_str(&MatrixFile::degrees(lab.code.degrees(), lifting).render());
    artifacts.push_str(&MatrixFile::coeffs(lab.code.coeffs(), m).render());
    artifacts.push_str(&fer_csv(&report));

    let mut pass = code.binary_length() == 192 && lab.encodable;
    let mut points = Vec::new();
    let mut prev = f64::INFINITY;
    for rec in &report.records {
        let cp = ChannelPoint::new(192, 0.5, rec.snr_db).unwrap();
        let shannon = shannon_lower_bound(&cp).unwrap().exp();
        let mut notes = Vec::new();
        if rec.frame_errors < 100 {
            notes.push("fewer than 100 errors");
        }
        if rec.fer > prev {
            notes.push("FER increased");
        }
        if rec.fer < shannon {
            notes.push("below Shannon bound");
        }
        pass &= notes.is_empty();
        prev = rec.fer;
        let mut p = String::new();
        write!(
            p,
            "{} dB FER {:.3e} ({} err / {} frames, Shannon {:.2e})",
            rec.snr_db, rec.fer, rec.frame_errors, rec.frames, shannon
        )
        .unwrap();
        if !notes.is_empty() {
            write!(p, " [{}]", notes.join(", ")).unwrap();
        }
        points.push(p);
    }
    let detail = format!(
        "Tanner girth {:?}, generalized girth {:?}; {}",
        tanner_girth(&base, 12),
        lab.girth,
        points.join("; ")
    );
    (within(pass, detail, start.elapsed(), 1200), artifacts)
}

// --------------------------------------------------------------- criterion 10

fn criterion_10() -> Outcome {
    let script = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts/reproduce_paper_scale.sh");
    let present = script.is_file();
    outcome(
        present,
        format!(
            "length-2080 BP-vs-ML-bound gap is not reproduced at desk scale; long-running script {} ({})",
            "scripts/reproduce_paper_scale.sh",
            if present {
                "present, excluded from tests"
            } else {
                "MISSING"
            }
        ),
    )
}

// --------------------------------------------------------------- criterion 11

fn criterion_11(first6: &str, first9: &str, workers: usize) -> Outcome {
    let start = Instant::now();
    let (_, again6) = criterion_6();
    let alt_workers = if workers == 1 { 2 } else { 1 };
    let (_, again9) = criterion_9(alt_workers);
    let same6 = again6.as_bytes() == first6.as_bytes();
    let same9 = again9.as_bytes() == first9.as_bytes();
    let detail = format!(
        "criterion 6 outputs ({} bytes) {}; criterion 9 outputs ({} bytes, rerun with {alt_workers} workers) {}",
        first6.len(),
        if same6 { "identical" } else { "DIFFER" },
        first9.len(),
        if same9 { "identical" } else { "DIFFER" }
    );
    outcome(
        same6 && same9,
        format!("{detail}; {:.1} s", start.elapsed().as_secs_f64()),
    )
}

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |c: u32| selected.is_empty() || selected.contains(&c);
    let names = [
        "spectrum oracle equivalence",
        "binary reduction",
        "spectral claim at scale",
        "TS-bound soundness",
        "bound ordering",
        "SA construction",
        "DP cycle-counter oracle",
        "generalized-girth correctness",
        "BP sanity and pipeline",
        "full-scale result not reproduced",
        "determinism",
    ];
    let workers = workers();
    let mut failed = 0;
    let mut report = |c: u32, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("[{tag}] criterion {c}: {}: {}", names[c as usize - 1], o.detail);
    };
    let simple: [(u32, fn() -> Outcome); 7] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (7, criterion_7),
        (8, criterion_8),
    ];
    for (c, f) in simple {
        if want(c) {
            report(c, f());
        }
    }
    let mut art6 = None;
    let mut art9 = None;
    if want(6) || want(11) {
        let (o, a) = criterion_6();
        if want(6) {
            report(6, o);
        }
        art6 = Some(a);
    }
    if want(9) || want(11) {
        let (o, a) = criterion_9(workers);
        if want(9) {
            report(9, o);
        }
        art9 = Some(a);
    }
    if want(10) {
        report(10, criterion_10());
    }
    if want(11) {
        report(
            11,
            criterion_11(art6.as_deref().unwrap(), art9.as_deref().unwrap(), workers),
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
