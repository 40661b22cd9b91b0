//! Quasi-cyclic codes: the matrix triple, lifting, and bidiagonal encoding.
//!
//! A code is given by a binary base matrix `B`, a degree matrix `H_w` and a
//! coefficient matrix `H_c` (exponents of the primitive element), with `-1`
//! wherever `B` is zero. Lifting by `L` replaces entry `(i, j)` with degree
//! `w` and coefficient `α` by the block `α·P^w`, where `P` is the `L × L`
//! cyclic shift: row `i·L + t` gets `α` in column `j·L + (t + w) mod L`.

use crate::error::{Error, Result};
use crate::gf::{Element, GfContext};
use crate::matrix::{BinaryMatrix, IntMatrix};

/// Base, degree and coefficient matrices with lifting factor and field degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeMatrices {
    base: BinaryMatrix,
    degrees: IntMatrix,
    coeffs: IntMatrix,
    lifting: usize,
    m: u32,
}

impl CodeMatrices {
    pub fn new(base: BinaryMatrix, degrees: IntMatrix, coeffs: IntMatrix, lifting: usize, m: u32) -> Result<Self> {
        let bad = |msg: String| Err(Error::InconsistentMatrices(msg));
        if lifting == 0 {
            return bad("lifting factor must be positive".into());
        }
        if !(1..=crate::gf::MAX_DEGREE).contains(&m) {
            return Err(Error::FieldDegree(m));
        }
        let shape = (base.rows(), base.cols());
        if (degrees.rows(), degrees.cols()) != shape || (coeffs.rows(), coeffs.cols()) != shape {
            return bad(format!(
                "shapes differ: base {}x{}, degrees {}x{}, coeffs {}x{}",
                shape.0,
                shape.1,
                degrees.rows(),
                degrees.cols(),
                coeffs.rows(),
                coeffs.cols()
            ));
        }
        let order = (1i32 << m) - 1;
        for i in 0..shape.0 {
            for j in 0..shape.1 {
                let (b, w, a) = (base.get(i, j), degrees.get(i, j), coeffs.get(i, j));
                if !b {
                    if w != IntMatrix::ABSENT || a != IntMatrix::ABSENT {
                        return bad(format!("entry ({i},{j}) is zero in the base but labeled"));
                    }
                    continue;
                }
                if !(0..lifting as i32).contains(&w) {
                    return bad(format!("degree {w} at ({i},{j}) outside 0..{lifting}"));
                }
                if !(0..order).contains(&a) {
                    return bad(format!("coefficient exponent {a} at ({i},{j}) outside 0..{order}"));
                }
            }
        }
        Ok(CodeMatrices {
            base,
            degrees,
            coeffs,
            lifting,
            m,
        })
    }

    /// Degrees and coefficients all zero (every block the identity).
    pub fn unlabeled(base: BinaryMatrix, lifting: usize, m: u32) -> Result<Self> {
        let mut d = IntMatrix::filled(base.rows(), base.cols(), IntMatrix::ABSENT);
        for i in 0..base.rows() {
            for j in base.row_support(i) {
                d.set(i, j, 0);
            }
        }
        Self::new(base, d.clone(), d, lifting, m)
    }

    pub fn base(&self) -> &BinaryMatrix {
        &self.base
    }

    pub fn degrees(&self) -> &IntMatrix {
        &self.degrees
    }

    pub fn coeffs(&self) -> &IntMatrix {
        &self.coeffs
    }

    pub fn lifting(&self) -> usize {
        self.lifting
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn with_degrees(&self, degrees: IntMatrix) -> Result<Self> {
        Self::new(self.base.clone(), degrees, self.coeffs.clone(), self.lifting, self.m)
    }

    pub fn with_coeffs(&self, coeffs: IntMatrix) -> Result<Self> {
        Self::new(self.base.clone(), self.degrees.clone(), coeffs, self.lifting, self.m)
    }

    /// Field element at a present position.
    pub fn coeff(&self, ctx: &GfContext, i: usize, j: usize) -> Element {
        ctx.exp(i64::from(self.coeffs.get(i, j)))
    }

    /// True when the last `r` columns are `h0` (ones in the first and last
    /// rows) followed by an `r × (r-1)` bidiagonal block.
    pub fn is_encoder_form(&self) -> bool {
        encoder_form_issue(&self.base).is_none()
    }
}

fn encoder_form_issue(b: &BinaryMatrix) -> Option<String> {
    let (r, c) = (b.rows(), b.cols());
    if r < 2 || c <= r {
        return Some(format!("need more columns than rows and at least 2 rows, got {r}x{c}"));
    }
    let h0 = c - r;
    if b.col_support(h0) != [0, r - 1] {
        return Some(format!("column {h0} should have ones in rows 0 and {}", r - 1));
    }
    for k in 0..r - 1 {
        if b.col_support(h0 + 1 + k) != [k, k + 1] {
            return Some(format!(
                "column {} should have ones in rows {k} and {}",
                h0 + 1 + k,
                k + 1
            ));
        }
    }
    None
}

/// One nonzero of the lifted q-ary parity-check matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QEntry {
    pub row: usize,
    pub col: usize,
    pub coef: Element,
}

/// The lifted q-ary code with its sparse parity-check matrix.
#[derive(Clone, Debug)]
pub struct LiftedCode {
    cm: CodeMatrices,
    ctx: GfContext,
    n_checks: usize,
    n_symbols: usize,
    /// Sorted by row, then column.
    entries: Vec<QEntry>,
    row_ptr: Vec<usize>,
}

/// Expands `cm` by its lifting factor.
pub fn expand_qc(cm: &CodeMatrices, ctx: &GfContext) -> Result<LiftedCode> {
    if ctx.m() != cm.m() {
        return Err(Error::InconsistentMatrices(format!(
            "field GF(2^{}) does not match code over GF(2^{})",
            ctx.m(),
            cm.m()
        )));
    }
    let l = cm.lifting();
    let (r, c) = (cm.base().rows(), cm.base().cols());
    let mut entries = Vec::new();
    let mut row_ptr = vec![0];
    for i in 0..r {
        let support = cm.base().row_support(i);
        for t in 0..l {
            let mut row: Vec<QEntry> = support
                .iter()
                .map(|&j| QEntry {
                    row: i * l + t,
                    col: j * l + (t + cm.degrees().get(i, j) as usize) % l,
                    coef: cm.coeff(ctx, i, j),
                })
                .collect();
            row.sort_by_key(|e| e.col);
            entries.extend(row);
            row_ptr.push(entries.len());
        }
    }
    Ok(LiftedCode {
        cm: cm.clone(),
        ctx: ctx.clone(),
        n_checks: r * l,
        n_symbols: c * l,
        entries,
        row_ptr,
    })
}

impl LiftedCode {
    pub fn matrices(&self) -> &CodeMatrices {
        &self.cm
    }

    pub fn field(&self) -> &GfContext {
        &self.ctx
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    /// Length of the binary image.
    pub fn binary_length(&self) -> usize {
        self.n_symbols * self.ctx.m() as usize
    }

    /// Design rate `1 - rows/cols` of the lifted matrix.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.n_checks as f64 / self.n_symbols as f64
    }

    pub fn entries(&self) -> &[QEntry] {
        &self.entries
    }

    /// Indices into [`entries`](Self::entries) of check `r`.
    pub fn row_range(&self, r: usize) -> std::ops::Range<usize> {
        self.row_ptr[r]..self.row_ptr[r + 1]
    }

    pub fn row(&self, r: usize) -> &[QEntry] {
        &self.entries[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    /// Dense q-ary matrix, for small codes and tests.
    pub fn to_dense(&self) -> Vec<Vec<Element>> {
        let mut h = vec![vec![0; self.n_symbols]; self.n_checks];
        for e in &self.entries {
            h[e.row][e.col] = e.coef;
        }
        h
    }

    pub fn syndrome(&self, symbols: &[Element]) -> Vec<Element> {
        (0..self.n_checks)
            .map(|r| {
                self.row(r)
                    .iter()
                    .fold(0, |acc, e| acc ^ self.ctx.mul(e.coef, symbols[e.col]))
            })
            .collect()
    }

    pub fn is_codeword(&self, symbols: &[Element]) -> bool {
        (0..self.n_checks).all(|r| {
            self.row(r)
                .iter()
                .fold(0, |acc, e| acc ^ self.ctx.mul(e.coef, symbols[e.col]))
                == 0
        })
    }
}

/// Dense square matrix over GF(2^m), row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Dense {
    n: usize,
    a: Vec<Element>,
}

impl Dense {
    fn zeros(n: usize) -> Self {
        Dense { n, a: vec![0; n * n] }
    }

    /// Gauss–Jordan inverse; `None` if singular.
    fn inverse(&self, f: &GfContext) -> Option<Dense> {
        let n = self.n;
        let mut a = self.a.clone();
        let mut inv = Dense::zeros(n);
        for i in 0..n {
            inv.a[i * n + i] = 1;
        }
        for col in 0..n {
            let p = (col..n).find(|&r| a[r * n + col] != 0)?;
            if p != col {
                for k in 0..n {
                    a.swap(p * n + k, col * n + k);
                    inv.a.swap(p * n + k, col * n + k);
                }
            }
            let s = f.inv(a[col * n + col]).unwrap();
            for k in 0..n {
                a[col * n + k] = f.mul(a[col * n + k], s);
                inv.a[col * n + k] = f.mul(inv.a[col * n + k], s);
            }
            for r in 0..n {
                let factor = a[r * n + col];
                if r == col || factor == 0 {
                    continue;
                }
                for k in 0..n {
                    a[r * n + k] ^= f.mul(factor, a[col * n + k]);
                    inv.a[r * n + k] ^= f.mul(factor, inv.a[col * n + k]);
                }
            }
        }
        Some(inv)
    }

    fn mul_vec(&self, f: &GfContext, x: &[Element]) -> Vec<Element> {
        (0..self.n)
            .map(|r| (0..self.n).fold(0, |acc, c| acc ^ f.mul(self.a[r * self.n + c], x[c])))
            .collect()
    }
}

/// A lifted block `α·P^w`.
#[derive(Clone, Copy, Debug)]
struct Block {
    coef: Element,
    shift: usize,
}

impl Block {
    /// `y[t] = α·x[(t + w) mod L]`.
    fn apply(&self, f: &GfContext, x: &[Element]) -> Vec<Element> {
        let l = x.len();
        (0..l).map(|t| f.mul(self.coef, x[(t + self.shift) % l])).collect()
    }

    /// Solves `α·P^w x = y`.
    fn solve(&self, f: &GfContext, y: &[Element]) -> Vec<Element> {
        let l = y.len();
        let inv = f.inv(self.coef).unwrap();
        (0..l).map(|u| f.mul(inv, y[(u + l - self.shift % l) % l])).collect()
    }
}

fn add_into(acc: &mut [Element], x: &[Element]) {
    acc.iter_mut().zip(x).for_each(|(a, b)| *a ^= b);
}

/// Encoder for codes whose base has the form `(H_inf | h0 | H_bd)`.
///
/// The bidiagonal part is eliminated block row by block row, leaving every
/// parity block affine in the `h0` block `p0`; the last block row then gives
/// an `L × L` system `M·p0 = s`, inverted once at construction.
#[derive(Clone, Debug)]
pub struct Encoder {
    code: LiftedCode,
    k_cols: usize,
    h0_top: Block,
    h0_bottom: Block,
    /// Bidiagonal blocks: `diag[k]` at (k, k), `sub[k]` at (k+1, k).
    diag: Vec<Block>,
    sub: Vec<Block>,
    m_inv: Dense,
}

impl Encoder {
    pub fn new(code: &LiftedCode) -> Result<Self> {
        let cm = code.matrices();
        if let Some(issue) = encoder_form_issue(cm.base()) {
            return Err(Error::NotEncoderForm(issue));
        }
        let f = code.field();
        let (r, c, l) = (cm.base().rows(), cm.base().cols(), cm.lifting());
        let k_cols = c - r;
        let block = |i: usize, j: usize| Block {
            coef: cm.coeff(f, i, j),
            shift: cm.degrees().get(i, j) as usize,
        };
        let h0_top = block(0, k_cols);
        let h0_bottom = block(r - 1, k_cols);
        let diag: Vec<Block> = (0..r - 1).map(|k| block(k, k_cols + 1 + k)).collect();
        let sub: Vec<Block> = (0..r - 1).map(|k| block(k + 1, k_cols + 1 + k)).collect();
        // Column t of M is the last-row residual for p0 = e_t and zero info.
        let mut m = Dense::zeros(l);
        for t in 0..l {
            let mut p0 = vec![0; l];
            p0[t] = 1;
            let mut p = diag[0].solve(f, &h0_top.apply(f, &p0));
            for k in 1..r - 1 {
                p = diag[k].solve(f, &sub[k - 1].apply(f, &p));
            }
            let mut col = h0_bottom.apply(f, &p0);
            add_into(&mut col, &sub[r - 2].apply(f, &p));
            for (row, v) in col.into_iter().enumerate() {
                m.a[row * l + t] = v;
            }
        }
        let m_inv = m.inverse(f).ok_or(Error::SingularParity)?;
        Ok(Encoder {
            code: code.clone(),
            k_cols,
            h0_top,
            h0_bottom,
            diag,
            sub,
            m_inv,
        })
    }

    /// Number of information symbols.
    pub fn k(&self) -> usize {
        self.k_cols * self.code.matrices().lifting()
    }

    /// Systematic codeword: the information symbols followed by parity.
    pub fn encode(&self, info: &[Element]) -> Result<Vec<Element>> {
        let f = self.code.field();
        let cm = self.code.matrices();
        let (r, l) = (cm.base().rows(), cm.lifting());
        if info.len() != self.k() {
            return Err(Error::InconsistentMatrices(format!(
                "expected {} information symbols, got {}",
                self.k(),
                info.len()
            )));
        }
        let mut word = info.to_vec();
        word.resize(self.code.n_symbols(), 0);
        // Information syndrome per block row.
        let mut s: Vec<Vec<Element>> = vec![vec![0; l]; r];
        for e in self.code.entries() {
            if e.col < self.k() {
                s[e.row / l][e.row % l] ^= f.mul(e.coef, word[e.col]);
            }
        }
        let chain = |p0: &[Element]| {
            let mut y = s[0].clone();
            add_into(&mut y, &self.h0_top.apply(f, p0));
            let mut parts = vec![self.diag[0].solve(f, &y)];
            for k in 1..r - 1 {
                let mut y = s[k].clone();
                add_into(&mut y, &self.sub[k - 1].apply(f, &parts[k - 1]));
                parts.push(self.diag[k].solve(f, &y));
            }
            parts
        };
        let free = chain(&vec![0; l]);
        let mut rhs = s[r - 1].clone();
        add_into(&mut rhs, &self.sub[r - 2].apply(f, &free[r - 2]));
        let p0 = self.m_inv.mul_vec(f, &rhs);
        debug_assert!({
            let mut chk = self.h0_bottom.apply(f, &p0);
            add_into(&mut chk, &self.sub[r - 2].apply(f, &chain(&p0)[r - 2]));
            chk == s[r - 1]
        });
        let parts = chain(&p0);
        let base = self.k_cols * l;
        word[base..base + l].copy_from_slice(&p0);
        for (k, p) in parts.iter().enumerate() {
            let off = base + (k + 1) * l;
            word[off..off + l].copy_from_slice(p);
        }
        Ok(word)
    }
}

/// Encodes `info` with a freshly built [`Encoder`].
pub fn encode(code: &LiftedCode, info: &[Element]) -> Result<Vec<Element>> {
    Encoder::new(code)?.encode(info)
}
