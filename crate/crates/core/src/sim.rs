//! BPSK-AWGN channel, q-ary sum-product decoding and FER measurement.
//!
//! Bit `i` of a symbol maps to binary-image position `j·m + i` (see
//! [`GfContext::expand_bits`]); bit `b` is sent as `1 - 2b`, and channel LLRs
//! are `ln P(b=0)/P(b=1) = 2y/σ²`.

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bounds::sigma_from_snr;
use crate::error::{Error, Result};
use crate::gf::{Element, GfContext};
use crate::qc::{Encoder, LiftedCode};
use crate::seed::{self, Rng};

pub use crate::qc::{encode, expand_qc};

/// Default iteration limit.
pub const DEFAULT_MAX_ITER: usize = 50;

/// Floor applied to every message entry.
pub const PROB_FLOOR: f64 = 1e-30;

/// Noisy LLRs for a bit sequence.
pub fn awgn_bpsk(bits: &[u8], sigma: f64, rng: &mut Rng) -> Vec<f64> {
    let scale = 2.0 / (sigma * sigma);
    bits.iter()
        .map(|&b| {
            let x = 1.0 - 2.0 * f64::from(b);
            let z: f64 = rng.sample(StandardNormal);
            scale * (x + sigma * z)
        })
        .collect()
}

/// In-place unnormalized Walsh–Hadamard transform.
fn wht(v: &mut [f64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn normalize(v: &mut [f64]) {
    for x in v.iter_mut() {
        if !(*x > PROB_FLOOR) {
            *x = PROB_FLOOR;
        }
    }
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
}

/// Symbol probabilities from the bit LLRs of one symbol.
pub fn symbol_probabilities(llrs: &[f64], out: &mut [f64]) {
    // out[a] = -sum of llrs over the set bits of a, filled one bit at a time.
    out[0] = 0.0;
    for (i, &l) in llrs.iter().enumerate() {
        let h = 1 << i;
        for a in 0..h {
            out[a + h] = out[a] - l;
        }
    }
    let hi = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for o in out.iter_mut() {
        *o = (*o - hi).exp();
    }
    normalize(out);
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutput {
    pub symbols: Vec<Element>,
    pub converged: bool,
    pub iterations: usize,
}

/// Flooding-schedule sum-product decoder with reusable buffers.
pub struct BpDecoder<'a> {
    code: &'a LiftedCode,
    q: usize,
    m: usize,
    /// `mul[e*q + x] = h_e · x`.
    mul: Vec<u16>,
    var_edges: Vec<Vec<usize>>,
    channel: Vec<f64>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    posterior: Vec<f64>,
}

impl<'a> BpDecoder<'a> {
    pub fn new(code: &'a LiftedCode) -> Self {
        let f: &GfContext = code.field();
        let q = f.q();
        let entries = code.entries();
        let mut mul = Vec::with_capacity(entries.len() * q);
        let mut var_edges = vec![Vec::new(); code.n_symbols()];
        for (e, ent) in entries.iter().enumerate() {
            mul.extend((0..q).map(|x| f.mul(ent.coef, x as Element)));
            var_edges[ent.col].push(e);
        }
        let ne = entries.len();
        BpDecoder {
            code,
            q,
            m: f.m() as usize,
            mul,
            var_edges,
            channel: vec![0.0; code.n_symbols() * q],
            v2c: vec![0.0; ne * q],
            c2v: vec![0.0; ne * q],
            posterior: vec![0.0; code.n_symbols() * q],
        }
    }

    /// Symbol posteriors after the last [`decode`](Self::decode) call.
    pub fn posteriors(&self) -> &[f64] {
        &self.posterior
    }

    /// Decodes bit LLRs. With `early_stop` the decoder returns as soon as the
    /// hard decision has a zero syndrome.
    pub fn decode(&mut self, llrs: &[f64], max_iter: usize, early_stop: bool) -> Result<DecodeOutput> {
        let (q, m) = (self.q, self.m);
        let n = self.code.n_symbols();
        if llrs.len() != n * m {
            return Err(Error::InconsistentMatrices(format!(
                "expected {} LLRs, got {}",
                n * m,
                llrs.len()
            )));
        }
        for v in 0..n {
            symbol_probabilities(&llrs[v * m..(v + 1) * m], &mut self.channel[v * q..(v + 1) * q]);
        }
        for (e, ent) in self.code.entries().iter().enumerate() {
            self.v2c[e * q..(e + 1) * q].copy_from_slice(&self.channel[ent.col * q..(ent.col + 1) * q]);
        }
        let mut symbols = vec![0; n];
        let mut converged = false;
        let mut iterations = 0;
        for it in 1..=max_iter {
            iterations = it;
            self.check_update();
            self.variable_update(&mut symbols);
            if self.code.is_codeword(&symbols) {
                converged = true;
                if early_stop {
                    break;
                }
            } else {
                converged = false;
            }
        }
        Ok(DecodeOutput {
            symbols,
            converged,
            iterations,
        })
    }

    fn check_update(&mut self) {
        let q = self.q;
        let mut fwd: Vec<f64> = Vec::new();
        let mut spec: Vec<f64> = Vec::new();
        let mut acc = vec![0.0; q];
        let mut tmp = vec![0.0; q];
        for r in 0..self.code.n_checks() {
            let range = self.code.row_range(r);
            let (first, d) = (range.start, range.len());
            spec.clear();
            spec.resize(d * q, 0.0);
            for i in 0..d {
                let e = first + i;
                let s = &mut spec[i * q..(i + 1) * q];
                for x in 0..q {
                    s[self.mul[e * q + x] as usize] = self.v2c[e * q + x];
                }
                wht(s);
            }
            // Prefix products; suffix products folded in on the way back.
            fwd.clear();
            fwd.resize((d + 1) * q, 1.0);
            for i in 0..d {
                for z in 0..q {
                    fwd[(i + 1) * q + z] = fwd[i * q + z] * spec[i * q + z];
                }
            }
            acc.iter_mut().for_each(|a| *a = 1.0);
            for i in (0..d).rev() {
                for z in 0..q {
                    tmp[z] = fwd[i * q + z] * acc[z];
                }
                wht(&mut tmp);
                let e = first + i;
                for x in 0..q {
                    self.c2v[e * q + x] = tmp[self.mul[e * q + x] as usize];
                }
                normalize(&mut self.c2v[e * q..(e + 1) * q]);
                for z in 0..q {
                    acc[z] *= spec[i * q + z];
                }
            }
        }
    }

    fn variable_update(&mut self, symbols: &mut [Element]) {
        let q = self.q;
        for (v, edges) in self.var_edges.iter().enumerate() {
            let chan = &self.channel[v * q..(v + 1) * q];
            let post = &mut self.posterior[v * q..(v + 1) * q];
            post.copy_from_slice(chan);
            for &e in edges {
                for x in 0..q {
                    post[x] *= self.c2v[e * q + x];
                }
                rescale(post);
            }
            normalize(post);
            let mut best = 0;
            for x in 1..q {
                if post[x] > post[best] {
                    best = x;
                }
            }
            symbols[v] = best as Element;
            for &e in edges {
                let out = &mut self.v2c[e * q..(e + 1) * q];
                out.copy_from_slice(chan);
                for &e2 in edges {
                    if e2 != e {
                        for x in 0..q {
                            out[x] *= self.c2v[e2 * q + x];
                        }
                        rescale(out);
                    }
                }
                normalize(out);
            }
        }
    }
}

/// Keeps a running product away from underflow without a full normalization.
fn rescale(v: &mut [f64]) {
    let hi = v.iter().copied().fold(0.0, f64::max);
    if hi < 1e-100 && hi > 0.0 {
        let k = 1.0 / hi;
        v.iter_mut().for_each(|x| *x *= k);
    }
}

/// Convenience wrapper around a one-off [`BpDecoder`].
pub fn bp_decode(code: &LiftedCode, llrs: &[f64], max_iter: usize) -> Result<DecodeOutput> {
    BpDecoder::new(code).decode(llrs, max_iter, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FerConfig {
    pub target_errors: u64,
    pub max_frames: u64,
    pub max_iter: usize,
    pub seed: u64,
    pub workers: usize,
    /// Encode uniform random information instead of sending the zero word.
    pub random_info: bool,
}

impl Default for FerConfig {
    fn default() -> Self {
        FerConfig {
            target_errors: 20,
            max_frames: 1_000_000,
            max_iter: DEFAULT_MAX_ITER,
            seed: 0,
            workers: 1,
            random_info: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FerRecord {
    pub snr_db: f64,
    pub sigma: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub avg_iters: f64,
    /// Seed of this point's frame streams.
    pub seed: u64,
    /// `iter_hist[i]` frames stopped after `i` iterations.
    pub iter_hist: Vec<u64>,
    /// Stopped by `max_frames` before reaching the error target.
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FerReport {
    pub records: Vec<FerRecord>,
}

impl FerReport {
    pub fn any_truncated(&self) -> bool {
        self.records.iter().any(|r| r.truncated)
    }
}

struct Frame {
    error: bool,
    bit_errors: u64,
    iterations: usize,
}

fn run_frame(
    dec: &mut BpDecoder<'_>,
    enc: Option<&Encoder>,
    sigma: f64,
    max_iter: usize,
    frame_seed: u64,
) -> Result<Frame> {
    let code = dec.code;
    let f = code.field();
    let mut rng = seed::rng(frame_seed);
    let word = match enc {
        Some(enc) => {
            let q = f.q() as u32;
            let info: Vec<Element> = (0..enc.k()).map(|_| rng.random_range(0..q) as Element).collect();
            enc.encode(&info)?
        }
        None => vec![0; code.n_symbols()],
    };
    let bits = f.expand_bits(&word);
    let llrs = awgn_bpsk(&bits, sigma, &mut rng);
    let out = dec.decode(&llrs, max_iter, true)?;
    let bit_errors = out
        .symbols
        .iter()
        .zip(&word)
        .map(|(&a, &b)| u64::from((a ^ b).count_ones()))
        .sum();
    Ok(Frame {
        error: out.symbols != word,
        bit_errors,
        iterations: out.iterations,
    })
}

/// Frame error rates over an SNR grid (dB per information bit, design rate).
///
/// Frame `i` at point `p` draws its noise from a stream seeded by
/// `(seed, p, i)`, and frames are tallied in index order until the error
/// target is met, so the report does not depend on the worker count.
pub fn run_fer(code: &LiftedCode, snrs: &[f64], cfg: &FerConfig) -> Result<FerReport> {
    if cfg.target_errors == 0 || cfg.max_frames == 0 {
        return Err(Error::InvalidChannel(
            "target_errors and max_frames must be positive".into(),
        ));
    }
    let enc = if cfg.random_info {
        Some(Encoder::new(code)?)
    } else {
        None
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidChannel(format!("thread pool: {e}")))?;
    let rate = code.design_rate();
    let base = seed::derive(cfg.seed, "sim.fer");
    let workers = cfg.workers.max(1);
    let mut decoders: Vec<BpDecoder<'_>> = (0..workers).map(|_| BpDecoder::new(code)).collect();
    // Frames past the error target are decoded but not tallied.
    let batch = 64 * workers as u64;
    let mut records = Vec::with_capacity(snrs.len());
    for (p, &snr) in snrs.iter().enumerate() {
        let sigma = sigma_from_snr(rate, snr);
        let point_seed = seed::derive_indexed(base, p as u64);
        let mut rec = FerRecord {
            snr_db: snr,
            sigma,
            frames: 0,
            frame_errors: 0,
            bit_errors: 0,
            fer: 0.0,
            avg_iters: 0.0,
            seed: point_seed,
            iter_hist: vec![0; cfg.max_iter + 1],
            truncated: false,
        };
        let mut iter_sum = 0u64;
        'outer: while rec.frames < cfg.max_frames {
            let start = rec.frames;
            let end = (start + batch).min(cfg.max_frames);
            let chunk = (end - start).div_ceil(workers as u64);
            let frames: Vec<Vec<Result<Frame>>> = pool.install(|| {
                decoders
                    .par_iter_mut()
                    .enumerate()
                    .map(|(w, dec)| {
                        let lo = (start + w as u64 * chunk).min(end);
                        let hi = (lo + chunk).min(end);
                        (lo..hi)
                            .map(|i| {
                                run_frame(
                                    dec,
                                    enc.as_ref(),
                                    sigma,
                                    cfg.max_iter,
                                    seed::derive_indexed(point_seed, i),
                                )
                            })
                            .collect()
                    })
                    .collect()
            });
            for fr in frames.into_iter().flatten() {
                let fr = fr?;
                rec.frames += 1;
                rec.bit_errors += fr.bit_errors;
                rec.iter_hist[fr.iterations] += 1;
                iter_sum += fr.iterations as u64;
                if fr.error {
                    rec.frame_errors += 1;
                    if rec.frame_errors >= cfg.target_errors {
                        break 'outer;
                    }
                }
            }
        }
        rec.truncated = rec.frame_errors < cfg.target_errors;
        rec.fer = rec.frame_errors as f64 / rec.frames as f64;
        rec.avg_iters = iter_sum as f64 / rec.frames as f64;
        records.push(rec);
    }
    Ok(FerReport { records })
}
