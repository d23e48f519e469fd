//! Dense exact linear algebra over a prime field `F_p`.
//!
//! All entries are stored reduced into `0..p` as `u32`; products are formed
//! in `u64`, so any prime below `2^32` works. For `p = 2` elimination runs on
//! bit-packed rows (64 columns per word, XOR row operations) and produces
//! exactly the same reduced row echelon form as the generic path.
//!
//! Pivoting is fixed: for each column left to right, the first row at or
//! below the current pivot row with a nonzero entry is swapped up. Nothing is
//! randomized, so the kernel basis is reproducible.

use std::fmt;

use crate::error::{domain, Result};

pub(crate) fn mul_mod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

pub(crate) fn add_mod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 + b as u64) % p as u64) as u32
}

pub(crate) fn neg_mod(a: u32, p: u32) -> u32 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

pub(crate) fn pow_mod(mut base: u32, mut exp: u64, p: u32) -> u32 {
    let mut acc = 1 % p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse of a nonzero element (Fermat).
pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p as u64 - 2, p)
}

/// Reduce a signed integer into `0..p`.
pub fn reduce(x: i64, p: u32) -> u32 {
    x.rem_euclid(p as i64) as u32
}

/// A vector over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpVector {
    p: u32,
    values: Vec<u32>,
}

impl FpVector {
    pub fn new(p: u32, values: Vec<u32>) -> Self {
        let values = values.into_iter().map(|v| v % p).collect();
        FpVector { p, values }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }
}

/// Row-major dense matrix over `F_p`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix mod {} ({}x{}):", self.p, self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        FpMatrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u32, size: usize) -> Self {
        let mut m = Self::zeros(p, size, size);
        for i in 0..size {
            m.data[i * size + i] = 1 % p;
        }
        m
    }

    /// Entries are reduced mod `p` on the way in.
    pub fn from_vec(p: u32, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if p < 2 {
            return Err(domain(format!("modulus {p} is not a prime")));
        }
        if data.len() != rows * cols {
            return Err(domain(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let data = data.into_iter().map(|v| v % p).collect();
        Ok(FpMatrix {
            p,
            rows,
            cols,
            data,
        })
    }

    /// Build from signed rows; all rows must have equal length.
    pub fn from_rows(p: u32, rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(domain("ragged rows"));
        }
        let data = rows.iter().flatten().map(|&x| reduce(x, p)).collect();
        Self::from_vec(p, rows.len(), cols, data)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.p;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, r: usize) -> &mut [u32] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &FpVector) -> Result<FpVector> {
        if v.len() != self.cols || v.p != self.p {
            return Err(domain(format!(
                "cannot multiply {}x{} matrix mod {} by length-{} vector mod {}",
                self.rows,
                self.cols,
                self.p,
                v.len(),
                v.p
            )));
        }
        let p = self.p as u64;
        let values = (0..self.rows)
            .map(|r| {
                let acc = self
                    .row(r)
                    .iter()
                    .zip(&v.values)
                    .fold(0u64, |acc, (&a, &b)| (acc + a as u64 * b as u64) % p);
                acc as u32
            })
            .collect();
        Ok(FpVector { p: self.p, values })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let cols = self.cols;
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * cols);
        head[lo * cols..(lo + 1) * cols].swap_with_slice(&mut tail[..cols]);
    }
}

/// Bit-packed matrix over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        Gf2Matrix {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn from_fp(m: &FpMatrix) -> Self {
        debug_assert_eq!(m.p, 2);
        let mut out = Self::zeros(m.rows, m.cols);
        for r in 0..m.rows {
            for (c, &v) in m.row(r).iter().enumerate() {
                if v & 1 == 1 {
                    out.set(r, c, true);
                }
            }
        }
        out
    }

    pub fn to_fp(&self) -> FpMatrix {
        let mut out = FpMatrix::zeros(2, self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    out.data[r * self.cols + c] = 1;
                }
            }
        }
        out
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.words {
            self.data.swap(a * self.words + w, b * self.words + w);
        }
    }

    /// `row[dst] ^= row[src]`, starting at word `from`.
    fn xor_row(&mut self, dst: usize, src: usize, from: usize) {
        let words = self.words;
        for w in from..words {
            let s = self.data[src * words + w];
            self.data[dst * words + w] ^= s;
        }
    }

    /// In-place reduced row echelon form; returns pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(pr, r);
            let from = c / 64;
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.xor_row(i, r, from);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Rank by forward elimination only.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c)) else {
                continue;
            };
            m.swap_rows(pr, r);
            let from = c / 64;
            for i in r + 1..m.rows {
                if m.get(i, c) {
                    m.xor_row(i, r, from);
                }
            }
            r += 1;
        }
        r
    }
}

/// Reduced row echelon form by the generic (any prime) path.
pub fn rref_generic(m: &FpMatrix) -> (FpMatrix, Vec<usize>) {
    let mut a = m.clone();
    let p = a.p;
    let cols = a.cols;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.rows {
            break;
        }
        let Some(pr) = (r..a.rows).find(|&i| a.get(i, c) != 0) else {
            continue;
        };
        a.swap_rows(pr, r);
        let inv = inv_mod(a.get(r, c), p);
        for v in &mut a.row_mut(r)[c..] {
            *v = mul_mod(*v, inv, p);
        }
        let pivot_row: Vec<u32> = a.row(r)[c..].to_vec();
        for i in 0..a.rows {
            if i == r {
                continue;
            }
            let factor = a.get(i, c);
            if factor == 0 {
                continue;
            }
            let neg = (p - factor) as u64;
            for (v, &pv) in a.row_mut(i)[c..].iter_mut().zip(&pivot_row) {
                *v = ((*v as u64 + neg * pv as u64) % p as u64) as u32;
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Reduced row echelon form by the bit-packed path; `m` must be over `F_2`.
pub fn rref_gf2(m: &FpMatrix) -> (FpMatrix, Vec<usize>) {
    let mut b = Gf2Matrix::from_fp(m);
    let pivots = b.rref_in_place();
    (b.to_fp(), pivots)
}

/// Reduced row echelon form with the pivot columns in increasing order.
pub fn rref(m: &FpMatrix) -> (FpMatrix, Vec<usize>) {
    if m.p == 2 {
        rref_gf2(m)
    } else {
        rref_generic(m)
    }
}

/// Rank over `F_p`.
pub fn rank_mod_p(m: &FpMatrix) -> usize {
    if m.p == 2 {
        Gf2Matrix::from_fp(m).rank()
    } else {
        rref_generic(m).1.len()
    }
}

/// Canonical kernel basis from an already computed rref.
pub(crate) fn kernel_from_rref(r: &FpMatrix, pivots: &[usize]) -> Vec<FpVector> {
    let p = r.p;
    let mut is_pivot = vec![false; r.cols];
    for &c in pivots {
        is_pivot[c] = true;
    }
    (0..r.cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut values = vec![0u32; r.cols];
            values[free] = 1;
            for (row, &pc) in pivots.iter().enumerate() {
                values[pc] = neg_mod(r.get(row, free), p);
            }
            FpVector { p, values }
        })
        .collect()
}

/// Basis of `{c : M c = 0}`, one vector per free column in increasing
/// order, each equal to 1 at its own free column and 0 at the others.
pub fn kernel_basis(m: &FpMatrix) -> Vec<FpVector> {
    let (r, pivots) = rref(m);
    kernel_from_rref(&r, &pivots)
}
