//! Degree and coefficient labeling of a base matrix.
//!
//! A Tanner cycle of the base matrix is listed by its entries in traversal
//! order `e_1, e_2, ..., e_{2k}` (see [`TannerCycle::positions`]): odd entries
//! enter a variable from a check, even entries leave it. The cycle survives
//! lifting iff the alternating degree sum `w_1 - w_2 + w_3 - ... - w_{2k}`
//! vanishes mod `L`, and its coefficient submatrix is degenerate iff the
//! product of odd-position coefficients equals the product of even-position
//! ones. A cycle of the lifted graph satisfying the coefficient condition is a
//! nonbinary cycle; the shortest such length is the generalized girth.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::gf::{Element, GfContext};
use crate::graph::{tanner_cycles, TannerCycle};
use crate::matrix::{BinaryMatrix, IntMatrix};
use crate::qc::{expand_qc, CodeMatrices, Encoder};
use crate::seed;

/// Default Tanner-length cap for cycle enumeration.
pub const DEFAULT_G_CAP: usize = 10;

/// Whether an alternating degree sequence closes after one lap of the lift.
pub fn cycle_survives_lifting(degrees: &[i64], lifting: usize) -> bool {
    debug_assert!(degrees.len() % 2 == 0);
    let sum: i64 = degrees
        .iter()
        .enumerate()
        .map(|(i, &w)| if i % 2 == 0 { w } else { -w })
        .sum();
    sum.rem_euclid(lifting as i64) == 0
}

/// Whether the odd-position and even-position coefficient products agree.
pub fn cycle_degenerate_coeffs(coeffs: &[Element], ctx: &GfContext) -> Result<bool> {
    if coeffs.contains(&0) {
        return Err(Error::ZeroElement);
    }
    let (mut odd, mut even) = (1, 1);
    for (i, &a) in coeffs.iter().enumerate() {
        if i % 2 == 0 {
            odd = ctx.mul(odd, a);
        } else {
            even = ctx.mul(even, a);
        }
    }
    Ok(odd == even)
}

/// Both conditions for one base cycle of `cm`.
pub fn base_cycle_is_nonbinary(cm: &CodeMatrices, ctx: &GfContext, cycle: &TannerCycle) -> bool {
    let pos = cycle.positions();
    let w: Vec<i64> = pos.iter().map(|&(i, j)| i64::from(cm.degrees().get(i, j))).collect();
    let a: Vec<Element> = pos.iter().map(|&(i, j)| cm.coeff(ctx, i, j)).collect();
    cycle_survives_lifting(&w, cm.lifting()) && cycle_degenerate_coeffs(&a, ctx).unwrap_or(false)
}

fn lcm(a: u128, b: u128) -> u128 {
    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Counts of cycles in the lifted Tanner graph, by Tanner length `≤ g_cap`.
///
/// With `binary` set every lifted cycle counts; otherwise only those meeting
/// the coefficient condition. Lifted cycles that wind around a base cycle
/// several times or trace non-simple base walks are included.
///
/// The search runs from lift 0 of each base check `c` over walks whose base
/// checks are all `≥ c`; by the cyclic symmetry each lifted cycle is then
/// counted `2μ/L` times on average, where `μ` is the number of its checks in
/// base row `c`.
pub fn lifted_cycle_counts(cm: &CodeMatrices, ctx: &GfContext, g_cap: usize, binary: bool) -> BTreeMap<usize, u128> {
    let b = cm.base();
    let (r, c, l) = (b.rows(), b.cols(), cm.lifting());
    let order = ctx.order() as i64;
    let rows: Vec<Vec<(usize, usize, i64)>> = (0..r)
        .map(|i| {
            b.row_support(i)
                .into_iter()
                .map(|j| (j, cm.degrees().get(i, j) as usize, i64::from(cm.coeffs().get(i, j))))
                .collect()
        })
        .collect();
    let cols: Vec<Vec<(usize, usize, i64)>> = (0..c)
        .map(|j| {
            b.col_support(j)
                .into_iter()
                .map(|i| (i, cm.degrees().get(i, j) as usize, i64::from(cm.coeffs().get(i, j))))
                .collect()
        })
        .collect();
    let k_max = g_cap / 2;
    let scale = (1..=k_max as u128).fold(2, |acc, k| lcm(acc, 2 * k));

    struct Search<'a> {
        rows: &'a [Vec<(usize, usize, i64)>],
        cols: &'a [Vec<(usize, usize, i64)>],
        l: usize,
        order: i64,
        binary: bool,
        k_max: usize,
        scale: u128,
        root: usize,
        check_seen: Vec<bool>,
        var_seen: Vec<bool>,
        acc: Vec<u128>,
    }

    impl Search<'_> {
        /// At lifted check `(i, t)` after `k` variables; `mu` root-row visits.
        fn go(&mut self, i: usize, t: usize, prev_var: usize, k: usize, mu: u128, expo: i64) {
            let l = self.l;
            for idx in 0..self.rows[i].len() {
                let (j, w, a) = self.rows[i][idx];
                let s = (t + w) % l;
                let var = j * l + s;
                if var == prev_var || self.var_seen[var] {
                    continue;
                }
                let expo_v = expo + a;
                self.var_seen[var] = true;
                for jdx in 0..self.cols[j].len() {
                    let (i2, w2, a2) = self.cols[j][jdx];
                    if i2 == i || i2 < self.root {
                        continue;
                    }
                    let t2 = (s + l - w2) % l;
                    let expo2 = expo_v - a2;
                    if i2 == self.root && t2 == 0 {
                        if k + 1 >= 2 && (self.binary || expo2.rem_euclid(self.order) == 0) {
                            self.acc[k + 1] += self.scale / (2 * mu);
                        }
                        continue;
                    }
                    let chk = i2 * l + t2;
                    if self.check_seen[chk] || k + 1 >= self.k_max {
                        continue;
                    }
                    self.check_seen[chk] = true;
                    let mu2 = mu + u128::from(i2 == self.root);
                    self.go(i2, t2, var, k + 1, mu2, expo2);
                    self.check_seen[chk] = false;
                }
                self.var_seen[var] = false;
            }
        }
    }

    let mut s = Search {
        rows: &rows,
        cols: &cols,
        l,
        order,
        binary,
        k_max,
        scale,
        root: 0,
        check_seen: vec![false; r * l],
        var_seen: vec![false; c * l],
        acc: vec![0; k_max + 1],
    };
    for root in 0..r {
        s.root = root;
        s.check_seen[root * l] = true;
        s.go(root, 0, usize::MAX, 0, 1, 0);
        s.check_seen[root * l] = false;
    }
    s.acc
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v > 0)
        .map(|(k, &v)| {
            let total = v * l as u128;
            debug_assert_eq!(total % scale, 0);
            (2 * k, total / scale)
        })
        .collect()
}

/// Shortest nonbinary cycle length `≤ g_cap` and the number of lifted cycles
/// of that length; `(None, 0)` when there is none.
pub fn generalized_girth(cm: &CodeMatrices, ctx: &GfContext, g_cap: usize) -> (Option<usize>, u128) {
    match lifted_cycle_counts(cm, ctx, g_cap, false).into_iter().next() {
        Some((g, n)) => (Some(g), n),
        None => (None, 0),
    }
}

/// Simple base-Tanner cycles of length `≤ g_cap` meeting both conditions,
/// counted once per base cycle. Each such cycle lifts to `L` nonbinary cycles.
pub fn base_cycle_counts(cm: &CodeMatrices, ctx: &GfContext, g_cap: usize) -> BTreeMap<usize, u128> {
    let mut out = BTreeMap::new();
    for cyc in tanner_cycles(cm.base(), g_cap) {
        if base_cycle_is_nonbinary(cm, ctx, &cyc) {
            *out.entry(cyc.len()).or_insert(0) += 1;
        }
    }
    out
}

/// Girth `≤ g_cap` of the lifted binary Tanner graph and its multiplicity.
pub fn lifted_girth(cm: &CodeMatrices, ctx: &GfContext, g_cap: usize) -> (Option<usize>, u128) {
    match lifted_cycle_counts(cm, ctx, g_cap, true).into_iter().next() {
        Some((g, n)) => (Some(g), n),
        None => (None, 0),
    }
}

/// Column indices of the `h0` and bidiagonal blocks when `b` is in encoder
/// form.
fn parity_columns(b: &BinaryMatrix) -> Option<(usize, Vec<usize>)> {
    let (r, c) = (b.rows(), b.cols());
    if r < 2 || c <= r {
        return None;
    }
    let h0 = c - r;
    if b.col_support(h0) != [0, r - 1] {
        return None;
    }
    let bd: Vec<usize> = (h0 + 1..c).collect();
    for (k, &j) in bd.iter().enumerate() {
        if b.col_support(j) != [k, k + 1] {
            return None;
        }
    }
    Some((h0, bd))
}

const JOINT_LIMIT: usize = 4096;

/// Greedy degree assignment minimizing short cycles that survive lifting.
///
/// Columns are processed bidiagonal block first (all degrees 0), then `h0`,
/// then the remaining columns left to right. In each column the top entry is
/// fixed to 0, since shifting a whole column changes no cycle condition; the
/// others are chosen to minimize, lexicographically from the shortest length,
/// the number of surviving base cycles among those completed by this column.
/// Ties are broken uniformly with a generator seeded by `seed`.
pub fn optimize_degrees(b: &BinaryMatrix, lifting: usize, seed: u64, g_cap: usize) -> Result<IntMatrix> {
    if lifting < 1 {
        return Err(Error::InconsistentMatrices("lifting factor must be positive".into()));
    }
    let mut rng = seed::rng_for(seed, "labeler.degrees");
    let c = b.cols();
    let mut order: Vec<usize> = Vec::with_capacity(c);
    let mut fixed = vec![false; c];
    if let Some((h0, bd)) = parity_columns(b) {
        for &j in &bd {
            fixed[j] = true;
        }
        order.extend(&bd);
        order.push(h0);
        order.extend((0..h0).filter(|j| !fixed[*j]));
    } else {
        order.extend(0..c);
    }
    let mut rank = vec![0usize; c];
    for (p, &j) in order.iter().enumerate() {
        rank[j] = p;
    }
    let cycles = tanner_cycles(b, g_cap);
    let mut completes_at: Vec<Vec<(usize, &TannerCycle)>> = vec![Vec::new(); c];
    for cyc in &cycles {
        let last = cyc.vars.iter().copied().max_by_key(|&j| rank[j]).unwrap();
        completes_at[last].push((cyc.len() / 2, cyc));
    }
    let k_max = g_cap / 2;
    let mut d = IntMatrix::filled(b.rows(), c, IntMatrix::ABSENT);
    for &j in &order {
        let support = b.col_support(j);
        d.set(support[0], j, 0);
        if fixed[j] {
            for &i in &support {
                d.set(i, j, 0);
            }
            continue;
        }
        let free = &support[1..];
        let score = |d: &IntMatrix| -> Vec<usize> {
            let mut s = vec![0usize; k_max + 1];
            for &(k, cyc) in &completes_at[j] {
                let w: Vec<i64> = cyc.positions().iter().map(|&(i, jj)| i64::from(d.get(i, jj))).collect();
                if cycle_survives_lifting(&w, lifting) {
                    s[k] += 1;
                }
            }
            s
        };
        let combos = lifting.checked_pow(free.len() as u32).unwrap_or(usize::MAX);
        if combos <= JOINT_LIMIT {
            let mut best: Vec<Vec<i32>> = Vec::new();
            let mut best_score: Option<Vec<usize>> = None;
            for code in 0..combos {
                let mut x = code;
                let assign: Vec<i32> = free
                    .iter()
                    .map(|_| {
                        let v = (x % lifting) as i32;
                        x /= lifting;
                        v
                    })
                    .collect();
                for (&i, &v) in free.iter().zip(&assign) {
                    d.set(i, j, v);
                }
                let s = score(&d);
                match &best_score {
                    Some(bs) if s > *bs => {}
                    Some(bs) if s == *bs => best.push(assign),
                    _ => {
                        best_score = Some(s);
                        best = vec![assign];
                    }
                }
            }
            let pick = best.choose(&mut rng).unwrap();
            for (&i, &v) in free.iter().zip(pick) {
                d.set(i, j, v);
            }
        } else {
            for &i in free {
                d.set(i, j, 0);
            }
            for &i in free {
                let mut best = Vec::new();
                let mut best_score: Option<Vec<usize>> = None;
                for v in 0..lifting as i32 {
                    d.set(i, j, v);
                    let s = score(&d);
                    match &best_score {
                        Some(bs) if s > *bs => {}
                        Some(bs) if s == *bs => best.push(v),
                        _ => {
                            best_score = Some(s);
                            best = vec![v];
                        }
                    }
                }
                d.set(i, j, *best.choose(&mut rng).unwrap());
            }
        }
    }
    Ok(d)
}

/// A constituent-code candidate: a sorted list of primitive-element exponents
/// starting with 0 (the element 1).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CandidateRow {
    pub weight2_count: u64,
    pub exponents: Vec<u32>,
}

impl CandidateRow {
    pub fn k(&self) -> usize {
        self.exponents.len()
    }
}

/// Number of equal column pairs in the `m × mk` binary image of the row
/// `(α^{e_1}, ..., α^{e_k})`; column `b` of block `i` holds `α^{e_i + b}`.
pub fn weight2_count(ctx: &GfContext, exponents: &[u32]) -> u64 {
    let order = ctx.order();
    let mut hist = vec![0u64; order];
    for &e in exponents {
        for b in 0..ctx.m() as usize {
            hist[(e as usize + b) % order] += 1;
        }
    }
    hist.iter().map(|&c| c * c.saturating_sub(1) / 2).sum()
}

/// Candidate space size above which candidates are sampled.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;

/// The `list_size` best candidates of row weight `k`, ranked by
/// [`weight2_count`] and then lexicographically.
///
/// All sorted exponent sequences are scanned when `(q-1)^(k-1)` is at most
/// [`EXHAUSTIVE_LIMIT`]; otherwise sequences are drawn at random with a
/// generator seeded by `seed`.
pub fn gen_candidates(ctx: &GfContext, k: usize, list_size: usize, seed: u64) -> Result<Vec<CandidateRow>> {
    if k < 2 || list_size == 0 {
        return Err(Error::InconsistentMatrices(format!(
            "candidate lists need k >= 2 and a positive size, got k={k}, size={list_size}"
        )));
    }
    let order = ctx.order() as u32;
    let space = (order as u64).checked_pow(k as u32 - 1).unwrap_or(u64::MAX);
    let mut rows: Vec<CandidateRow> = Vec::new();
    if space <= EXHAUSTIVE_LIMIT {
        let mut seq = vec![0u32; k];
        loop {
            rows.push(CandidateRow {
                weight2_count: weight2_count(ctx, &seq),
                exponents: seq.clone(),
            });
            // Next non-decreasing sequence with seq[0] = 0.
            let Some(pos) = (1..k).rev().find(|&p| seq[p] + 1 < order) else {
                break;
            };
            let v = seq[pos] + 1;
            for x in &mut seq[pos..] {
                *x = v;
            }
        }
    } else {
        let mut rng = seed::rng_for(seed, "labeler.candidates");
        let draws = (50 * list_size).max(20_000);
        for _ in 0..draws {
            let mut seq: Vec<u32> = std::iter::once(0)
                .chain((1..k).map(|_| rng.random_range(0..order)))
                .collect();
            seq.sort_unstable();
            rows.push(CandidateRow {
                weight2_count: weight2_count(ctx, &seq),
                exponents: seq,
            });
        }
        rows.sort();
        rows.dedup();
    }
    rows.sort();
    rows.truncate(list_size);
    Ok(rows)
}

/// Candidate lists keyed by row weight.
pub type CandidateLists = BTreeMap<usize, Vec<CandidateRow>>;

/// Candidate lists for every distinct row weight of `b`.
pub fn candidates_for_base(ctx: &GfContext, b: &BinaryMatrix, list_size: usize, seed: u64) -> Result<CandidateLists> {
    let mut lists = CandidateLists::new();
    for i in 0..b.rows() {
        let k = b.row_weight(i);
        if let std::collections::btree_map::Entry::Vacant(e) = lists.entry(k) {
            e.insert(gen_candidates(ctx, k, list_size, seed::derive_indexed(seed, k as u64))?);
        }
    }
    Ok(lists)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LabelOptions {
    /// Stop after this many consecutive attempts without a new record.
    pub i_max: usize,
    pub seed: u64,
    pub g_cap: usize,
    /// Rank labelings whose parity part cannot be inverted below all others.
    pub require_encodable: bool,
}

impl Default for LabelOptions {
    fn default() -> Self {
        LabelOptions {
            i_max: 1000,
            seed: 0,
            g_cap: DEFAULT_G_CAP,
            require_encodable: true,
        }
    }
}

/// A record of the coefficient search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Record {
    pub attempt: usize,
    pub girth: Option<usize>,
    pub multiplicity: u128,
    pub encodable: bool,
}

#[derive(Clone, Debug)]
pub struct Labeling {
    pub code: CodeMatrices,
    pub girth: Option<usize>,
    pub multiplicity: u128,
    pub encodable: bool,
    pub attempts: usize,
    pub records: Vec<Record>,
}

fn girth_key(g: Option<usize>) -> usize {
    g.unwrap_or(usize::MAX)
}

/// Random search over constituent-code assignments.
///
/// Each attempt draws a candidate for every row from the list of its row
/// weight, shuffles it, and writes it onto the row's nonzero positions in
/// column order. An attempt becomes the record when its generalized girth is
/// larger, or equal with fewer shortest cycles; the search ends after
/// `i_max` consecutive attempts without a record. With `require_encodable`
/// (and `m > 1`, base in encoder form), encodable labelings always beat
/// non-encodable ones.
pub fn label_coefficients(
    ctx: &GfContext,
    base: &BinaryMatrix,
    degrees: &IntMatrix,
    lifting: usize,
    candidates: &CandidateLists,
    opts: &LabelOptions,
) -> Result<Labeling> {
    let rows: Vec<Vec<usize>> = (0..base.rows()).map(|i| base.row_support(i)).collect();
    for r in &rows {
        match candidates.get(&r.len()) {
            Some(list) if !list.is_empty() => {}
            _ => {
                return Err(Error::InconsistentMatrices(format!(
                    "no candidates for row weight {}",
                    r.len()
                )))
            }
        }
    }
    let template = CodeMatrices::unlabeled(base.clone(), lifting, ctx.m())?.with_degrees(degrees.clone())?;
    let check_enc = opts.require_encodable && ctx.m() > 1 && template.is_encoder_form();
    let mut rng = seed::rng_for(opts.seed, "labeler.coeffs");
    let mut best: Option<CodeMatrices> = None;
    let (mut g, mut n, mut enc) = (Some(0usize), 0u128, false);
    let mut records = Vec::new();
    let mut attempts = 0usize;
    let mut idle = 0usize;
    while idle <= opts.i_max {
        idle += 1;
        attempts += 1;
        let mut coeffs = IntMatrix::filled(base.rows(), base.cols(), IntMatrix::ABSENT);
        for (i, support) in rows.iter().enumerate() {
            let cand = candidates[&support.len()].choose(&mut rng).unwrap();
            let mut e = cand.exponents.clone();
            e.shuffle(&mut rng);
            for (&j, &x) in support.iter().zip(&e) {
                coeffs.set(i, j, x as i32);
            }
        }
        let cm = template.with_coeffs(coeffs)?;
        let (g2, n2) = generalized_girth(&cm, ctx, opts.g_cap);
        let girth_better = girth_key(g2) > girth_key(g) || (g2 == g && n2 < n);
        let mut better = girth_better;
        if check_enc && (girth_better || !enc) {
            let enc2 = Encoder::new(&expand_qc(&cm, ctx)?).is_ok();
            better = match (enc2, enc) {
                (true, false) => true,
                (false, true) => false,
                _ => girth_better,
            };
            if better {
                enc = enc2;
            }
        }
        if better {
            g = g2;
            n = n2;
            best = Some(cm);
            idle = 0;
            records.push(Record {
                attempt: attempts,
                girth: g,
                multiplicity: n,
                encodable: enc || !check_enc,
            });
            if g.is_none() && (enc || !check_enc) {
                break;
            }
        }
    }
    let code = best.expect("the first attempt always sets a record");
    Ok(Labeling {
        encodable: check_enc && enc || !check_enc && Encoder::new(&expand_qc(&code, ctx)?).is_ok(),
        code,
        girth: g,
        multiplicity: n,
        attempts,
        records,
    })
}
