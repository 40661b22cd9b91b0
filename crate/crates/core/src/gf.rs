//! Arithmetic in GF(2^m), companion matrices and binary images.
//!
//! Elements are stored as `u16` bit vectors in the polynomial basis: bit `i`
//! is the coefficient of `α^i`, where `α` is a root of the field polynomial.
//!
//! The companion matrix of `a` is the `m × m` binary matrix of the map
//! `x ↦ a·x` acting on column vectors, so column `j` holds the bits of
//! `a·α^j`. With that convention `M(a)·M(b) = M(a·b)` and a q-ary null vector
//! of `H` expands bitwise into a binary null vector of the binary image.
//!
//! When no polynomial is supplied the field uses the numerically smallest
//! primitive polynomial of degree `m` (table [`DEFAULT_POLYS`]).

use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;

/// A field element in polynomial-basis bit representation.
pub type Element = u16;

pub const MAX_DEGREE: u32 = 10;

/// Smallest primitive polynomial of each degree `m = 1..=10`, bit `i` being the
/// coefficient of `x^i`.
pub const DEFAULT_POLYS: [u32; 10] = [
    0x3,   // x + 1
    0x7,   // x^2 + x + 1
    0xb,   // x^3 + x + 1
    0x13,  // x^4 + x + 1
    0x25,  // x^5 + x^2 + 1
    0x43,  // x^6 + x + 1
    0x83,  // x^7 + x + 1
    0x11d, // x^8 + x^4 + x^3 + x^2 + 1
    0x211, // x^9 + x^4 + 1
    0x409, // x^10 + x^3 + 1
];

/// Arithmetic tables for GF(2^m). Immutable once built.
#[derive(Clone, Debug)]
pub struct GfContext {
    m: u32,
    poly: u32,
    /// `exp[i] = α^i`, stored twice over so products of logs need no reduction.
    exp: Vec<Element>,
    /// `log[a]` for nonzero `a`; `log[0]` is unused.
    log: Vec<u16>,
}

fn poly_mulmod_x(a: u32, poly: u32, m: u32) -> u32 {
    let a = a << 1;
    if a >> m & 1 == 1 {
        a ^ poly
    } else {
        a
    }
}

/// Remainder of `a` modulo `b` over GF(2).
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = 31 - b.leading_zeros();
    while a != 0 && 31 - a.leading_zeros() >= db {
        a ^= b << (31 - a.leading_zeros() - db);
    }
    a
}

fn format_poly(p: u32) -> String {
    let mut terms = Vec::new();
    for i in (0..32).rev() {
        if p >> i & 1 == 1 {
            terms.push(match i {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            });
        }
    }
    terms.join(" + ")
}

/// A nontrivial factor of `poly` if it is reducible over GF(2).
fn find_factor(poly: u32, m: u32) -> Option<u32> {
    for d in 1..=m / 2 {
        for f in (1u32 << d)..(1u32 << (d + 1)) {
            if poly_rem(poly, f) == 0 {
                return Some(f);
            }
        }
    }
    None
}

impl GfContext {
    /// Builds GF(2^m), verifying that the polynomial generates a cyclic group
    /// of order `2^m - 1`.
    pub fn new(m: u32, poly: Option<u32>) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&m) {
            return Err(Error::FieldDegree(m));
        }
        let poly = poly.unwrap_or(DEFAULT_POLYS[m as usize - 1]);
        let reject = |reason: String| Error::NotPrimitive { poly, m, reason };
        if poly >> m != 1 {
            return Err(reject(format!("degree of {} is not {m}", format_poly(poly))));
        }
        if poly & 1 == 0 {
            return Err(reject("reducible, divisible by x".into()));
        }
        if let Some(f) = find_factor(poly, m) {
            return Err(reject(format!("reducible, divisible by {}", format_poly(f))));
        }
        let order = (1usize << m) - 1;
        let mut exp = Vec::with_capacity(2 * order);
        let mut log = vec![0u16; order + 1];
        let mut a = 1u32;
        for i in 0..order {
            if i > 0 && a == 1 {
                return Err(reject(format!(
                    "irreducible but not primitive: x has order {i}, not {order}"
                )));
            }
            exp.push(a as Element);
            log[a as usize] = i as u16;
            a = poly_mulmod_x(a, poly, m);
        }
        debug_assert_eq!(a, 1);
        exp.extend_from_within(..order);
        Ok(GfContext { m, poly, exp, log })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Field size `q = 2^m`.
    pub fn q(&self) -> usize {
        1 << self.m
    }

    /// Order of the multiplicative group, `q - 1`.
    pub fn order(&self) -> usize {
        (1 << self.m) - 1
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// `α^i` for `i = 0..q-1`.
    pub fn exp_table(&self) -> &[Element] {
        &self.exp[..self.order()]
    }

    /// `α^e`, for any integer exponent.
    #[inline]
    pub fn exp(&self, e: i64) -> Element {
        self.exp[e.rem_euclid(self.order() as i64) as usize]
    }

    /// Discrete logarithm of a nonzero element.
    #[inline]
    pub fn log(&self, a: Element) -> Option<u32> {
        (a != 0).then(|| u32::from(self.log[a as usize]))
    }

    #[inline]
    pub fn add(&self, a: Element, b: Element) -> Element {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    #[inline]
    pub fn inv(&self, a: Element) -> Option<Element> {
        (a != 0).then(|| self.exp[(self.order() - self.log[a as usize] as usize) % self.order()])
    }

    #[inline]
    pub fn div(&self, a: Element, b: Element) -> Option<Element> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    /// Companion matrix of a nonzero element.
    pub fn companion_matrix(&self, a: Element) -> Result<BinaryMatrix> {
        if a == 0 {
            return Err(Error::ZeroElement);
        }
        let m = self.m as usize;
        let mut out = BinaryMatrix::zeros(m, m);
        for j in 0..m {
            let col = self.mul(a, 1 << j);
            for i in 0..m {
                if col >> i & 1 == 1 {
                    out.set(i, j, true);
                }
            }
        }
        Ok(out)
    }

    /// Binary image of a q-ary matrix: each entry becomes its `m × m`
    /// companion block, zeros become zero blocks.
    pub fn binary_image<R: AsRef<[Element]>>(&self, h: &[R]) -> BinaryMatrix {
        let m = self.m as usize;
        let cols = h.first().map_or(0, |r| r.as_ref().len());
        let mut out = BinaryMatrix::zeros(h.len() * m, cols * m);
        for (i, row) in h.iter().enumerate() {
            for (j, &a) in row.as_ref().iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for jj in 0..m {
                    let col = self.mul(a, 1 << jj);
                    for ii in 0..m {
                        if col >> ii & 1 == 1 {
                            out.set(i * m + ii, j * m + jj, true);
                        }
                    }
                }
            }
        }
        out
    }

    /// Bit expansion of a q-ary vector, symbol `j` occupying bits `j*m..j*m+m`.
    pub fn expand_bits(&self, symbols: &[Element]) -> Vec<u8> {
        let m = self.m as usize;
        let mut out = Vec::with_capacity(symbols.len() * m);
        for &s in symbols {
            out.extend((0..m).map(|i| (s >> i & 1) as u8));
        }
        out
    }
}
