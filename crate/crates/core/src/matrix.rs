//! Dense binary and integer matrices.
//!
//! [`BinaryMatrix`] packs each row into 64-bit words; it backs base matrices,
//! companion matrices and binary images. [`IntMatrix`] holds degree and
//! coefficient matrices, where `-1` marks a position that is zero in the base
//! matrix.

use std::fmt;

/// A dense matrix over GF(2), row-major, one bit per entry.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        BinaryMatrix {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of 0/1 values. Any nonzero entry counts as one.
    pub fn from_rows<T: AsRef<[u8]>>(rows: &[T]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                if v != 0 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.words + c / 64];
        if value {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    /// Packed words of row `r`; bits beyond `cols` are zero.
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn col_weight(&self, c: usize) -> usize {
        (0..self.rows).filter(|&r| self.get(r, c)).count()
    }

    /// Row indices holding a one in column `c`.
    pub fn col_support(&self, c: usize) -> Vec<usize> {
        (0..self.rows).filter(|&r| self.get(r, c)).collect()
    }

    /// Column indices holding a one in row `r`.
    pub fn row_support(&self, r: usize) -> Vec<usize> {
        (0..self.cols).filter(|&c| self.get(r, c)).collect()
    }

    /// Column `c` packed into words (bit `r` is entry `(r, c)`).
    pub fn column_bits(&self, c: usize) -> Vec<u64> {
        let mut out = vec![0u64; self.rows.div_ceil(64).max(1)];
        for r in 0..self.rows {
            if self.get(r, c) {
                out[r / 64] |= 1 << (r % 64);
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &BinaryMatrix) -> BinaryMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    let (src, dst) = (other.row_words(k), r * out.words);
                    for (w, s) in src.iter().enumerate() {
                        out.data[dst + w] ^= s;
                    }
                }
            }
        }
        out
    }

    /// Product with a 0/1 column vector.
    pub fn mul_vec(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = 0u8;
                for (c, &b) in v.iter().enumerate() {
                    if b & 1 == 1 && self.get(r, c) {
                        acc ^= 1;
                    }
                }
                acc
            })
            .collect()
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        let mut rows: Vec<Vec<u64>> = (0..self.rows).map(|r| self.row_words(r).to_vec()).collect();
        let mut rank = 0;
        for c in 0..self.cols {
            let (w, b) = (c / 64, 1u64 << (c % 64));
            let Some(p) = (rank..rows.len()).find(|&i| rows[i][w] & b != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && row[w] & b != 0 {
                    row.iter_mut().zip(&pivot).for_each(|(x, y)| *x ^= y);
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) as u8).collect())
            .collect()
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "." })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A dense integer matrix; `-1` marks an absent entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i32>,
}

impl IntMatrix {
    pub const ABSENT: i32 = -1;

    pub fn filled(rows: usize, cols: usize, value: i32) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_rows<T: AsRef<[i32]>>(rows: &[T]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(row.as_ref());
        }
        IntMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: i32) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_present(&self, r: usize, c: usize) -> bool {
        self.get(r, c) != Self::ABSENT
    }

    pub fn row(&self, r: usize) -> &[i32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// The pattern of present entries as a binary matrix.
    pub fn support(&self) -> BinaryMatrix {
        let mut b = BinaryMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.is_present(r, c) {
                    b.set(r, c, true);
                }
            }
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_rank() {
        let a = BinaryMatrix::from_rows(&[[1u8, 1, 0], [0, 1, 1]]);
        let b = BinaryMatrix::from_rows(&[[1u8, 0], [1, 1], [0, 1]]);
        let p = a.mul(&b);
        assert_eq!(p.to_rows(), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(a.rank(), 2);
        assert_eq!(BinaryMatrix::from_rows(&[[1u8, 1], [1, 1]]).rank(), 1);
    }

    #[test]
    fn wide_rows_span_words() {
        let mut m = BinaryMatrix::zeros(2, 130);
        m.set(1, 129, true);
        m.set(1, 64, true);
        assert!(m.get(1, 129) && m.get(1, 64) && !m.get(0, 129));
        assert_eq!(m.row_weight(1), 2);
        assert_eq!(m.transpose().col_weight(1), 2);
    }

    #[test]
    fn support_of_int_matrix() {
        let h = IntMatrix::from_rows(&[[0, -1], [3, 2]]);
        assert_eq!(h.support().to_rows(), vec![vec![1, 0], vec![1, 1]]);
    }
}
