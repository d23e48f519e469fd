//! Sparse polynomials over `F_p` in `n` variables.
//!
//! Monomials are exponent vectors. The global monomial order is ascending
//! total degree, ties broken by ascending lexicographic order of the
//! exponent vectors; in two variables that reads `1, x2, x1, x2^2, x1*x2,
//! x1^2, ...`. Evaluation matrices use this order for their columns and
//! rendered polynomials list their terms in it.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul};

use serde::{Serialize, Serializer};

use crate::error::{domain, Result};
use crate::gflinalg::{add_mod, mul_mod, pow_mod, reduce};

/// A point of `F_p^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(Vec<u32>);

impl Point {
    pub fn new(coords: Vec<u32>) -> Self {
        Point(coords)
    }

    pub fn origin(n: usize) -> Self {
        Point(vec![0; n])
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// All coordinates are 0 or 1.
    pub fn is_boolean(&self) -> bool {
        self.0.iter().all(|&c| c <= 1)
    }

    pub fn is_reduced(&self, p: u32) -> bool {
        self.0.iter().all(|&c| c < p)
    }
}

impl From<Vec<u32>> for Point {
    fn from(v: Vec<u32>) -> Self {
        Point(v)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

/// Exponent vector of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_multilinear(&self) -> bool {
        self.0.iter().all(|&e| e <= 1)
    }

    /// Value at `x` mod `p` (`0^0 = 1`).
    pub fn eval(&self, x: &[u32], p: u32) -> u32 {
        self.0
            .iter()
            .zip(x)
            .filter(|(&e, _)| e > 0)
            .fold(1 % p, |acc, (&e, &xi)| {
                mul_mod(acc, pow_mod(xi % p, e as u64, p), p)
            })
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "x{}", i + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// Every exponent vector of length `n` with entries at most `cap` and total
/// degree at most `m`, in the global monomial order.
pub fn monomials_upto(n: usize, m: usize, cap: u32) -> Vec<Monomial> {
    fn fill(pos: usize, left: u32, cap: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if pos == cur.len() {
            if left == 0 {
                out.push(Monomial(cur.clone()));
            }
            return;
        }
        // remaining positions can absorb at most this much
        let room = cap.saturating_mul((cur.len() - pos - 1) as u32);
        let lo = left.saturating_sub(room);
        for e in lo..=left.min(cap) {
            cur[pos] = e;
            fill(pos + 1, left - e, cap, cur, out);
        }
        cur[pos] = 0;
    }

    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    let top = (m as u64).min(cap as u64 * n as u64) as u32;
    for t in 0..=top {
        fill(0, t, cap, &mut cur, &mut out);
    }
    out
}

/// Degree of a polynomial; the zero polynomial sits below every integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(u32),
}

impl Degree {
    pub fn at_most(self, bound: u64) -> bool {
        match self {
            Degree::NegInfinity => true,
            Degree::Finite(d) => d as u64 <= bound,
        }
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

impl Serialize for Degree {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Degree::NegInfinity => serializer.serialize_str("-inf"),
            Degree::Finite(d) => serializer.serialize_u32(*d),
        }
    }
}

/// A polynomial over `F_p`: monomial to nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    p: u32,
    n: usize,
    terms: BTreeMap<Monomial, u32>,
}

impl Polynomial {
    pub fn zero(p: u32, n: usize) -> Self {
        Polynomial {
            p,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(p: u32, n: usize, c: i64) -> Self {
        Self::from_terms(p, n, [(vec![0; n], c)]).expect("constant has the right arity")
    }

    /// `x_i`, with `i` 1-based.
    pub fn variable(p: u32, n: usize, i: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(domain(format!("variable x{i} outside x1..x{n}")));
        }
        let mut e = vec![0; n];
        e[i - 1] = 1;
        Self::from_terms(p, n, [(e, 1)])
    }

    /// Sum of `c * x^e` over the given terms, merging repeats.
    pub fn from_terms<I>(p: u32, n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, i64)>,
    {
        let mut acc: BTreeMap<Monomial, u32> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != n {
                return Err(domain(format!(
                    "exponent vector of length {} in {n} variables",
                    e.len()
                )));
            }
            let slot = acc.entry(Monomial(e)).or_insert(0);
            *slot = add_mod(*slot, reduce(c, p), p);
        }
        acc.retain(|_, c| *c != 0);
        Ok(Polynomial { p, n, terms: acc })
    }

    /// Coefficient vector over a monomial basis, as produced by a kernel
    /// computation on an evaluation matrix.
    pub fn from_coefficients(p: u32, n: usize, monomials: &[Monomial], coeffs: &[u32]) -> Self {
        let terms = monomials
            .iter()
            .zip(coeffs)
            .filter(|(_, &c)| c % p != 0)
            .map(|(mono, &c)| (mono.clone(), c % p))
            .collect();
        Polynomial { p, n, terms }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u32)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> u32 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn constant_term(&self) -> u32 {
        self.coefficient(&Monomial::one(self.n))
    }

    pub fn degree(&self) -> Degree {
        // the global order sorts by degree first
        self.terms
            .keys()
            .next_back()
            .map_or(Degree::NegInfinity, |m| Degree::Finite(m.degree()))
    }

    pub fn evaluate(&self, x: &Point) -> Result<u32> {
        if x.dim() != self.n {
            return Err(domain(format!(
                "point of dimension {} for a polynomial in {} variables",
                x.dim(),
                self.n
            )));
        }
        Ok(self.eval_unchecked(x.coords()))
    }

    pub(crate) fn eval_unchecked(&self, x: &[u32]) -> u32 {
        self.terms.iter().fold(0, |acc, (m, &c)| {
            add_mod(acc, mul_mod(c, m.eval(x, self.p), self.p), self.p)
        })
    }

    fn map_exponents(&self, f: impl Fn(u32) -> u32) -> Self {
        let p = self.p;
        let mut terms: BTreeMap<Monomial, u32> = BTreeMap::new();
        for (m, &c) in &self.terms {
            let e = Monomial(m.0.iter().map(|&e| f(e)).collect());
            let slot = terms.entry(e).or_insert(0);
            *slot = add_mod(*slot, c, p);
        }
        terms.retain(|_, c| *c != 0);
        Polynomial {
            p,
            n: self.n,
            terms,
        }
    }

    /// Normal form modulo `x_i^2 - x_i`: every positive exponent becomes 1.
    /// Values on `{0,1}^n` are preserved.
    pub fn multilinear_reduce(&self) -> Self {
        self.map_exponents(|e| e.min(1))
    }

    /// Normal form modulo `x_i^p - x_i`: exponents land in `0..=p-1`.
    /// Values on all of `F_p^n` are preserved.
    pub fn fermat_reduce(&self) -> Self {
        let p = self.p;
        self.map_exponents(|e| if e == 0 { 0 } else { (e - 1) % (p - 1) + 1 })
    }

    fn check_compatible(&self, other: &Self) {
        assert!(
            self.p == other.p && self.n == other.n,
            "mixing polynomials over F_{} in {} variables with F_{} in {}",
            self.p,
            self.n,
            other.p,
            other.n
        );
    }

    /// Multiply by the affine form `<x, v> - c`.
    fn mul_affine(&self, v: &[u32], c: u32) -> Self {
        let p = self.p;
        let neg_c = (p - c % p) % p;
        let mut acc: HashMap<Vec<u32>, u32> = HashMap::with_capacity(self.terms.len() * 2);
        for (m, &coef) in &self.terms {
            if neg_c != 0 {
                let slot = acc.entry(m.0.clone()).or_insert(0);
                *slot = add_mod(*slot, mul_mod(coef, neg_c, p), p);
            }
            for (j, &vj) in v.iter().enumerate() {
                let vj = vj % p;
                if vj == 0 {
                    continue;
                }
                let mut e = m.0.clone();
                e[j] += 1;
                let slot = acc.entry(e).or_insert(0);
                *slot = add_mod(*slot, mul_mod(coef, vj, p), p);
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|(e, c)| (Monomial(e), c))
            .collect();
        Polynomial {
            p,
            n: self.n,
            terms,
        }
    }

    /// Every coefficient multiplied by `s`.
    pub fn scale(&self, s: u32) -> Self {
        let p = self.p;
        let terms = self
            .terms
            .iter()
            .map(|(m, &c)| (m.clone(), mul_mod(c, s, p)))
            .filter(|(_, c)| *c != 0)
            .collect();
        Polynomial {
            p,
            n: self.n,
            terms,
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.check_compatible(rhs);
        let mut out = self.clone();
        for (m, &c) in &rhs.terms {
            let slot = out.terms.entry(m.clone()).or_insert(0);
            *slot = add_mod(*slot, c, self.p);
        }
        out.terms.retain(|_, c| *c != 0);
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.check_compatible(rhs);
        let p = self.p;
        let mut acc: HashMap<Vec<u32>, u32> = HashMap::new();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                let e: Vec<u32> = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
                let slot = acc.entry(e).or_insert(0);
                *slot = add_mod(*slot, mul_mod(ca, cb, p), p);
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|(e, c)| (Monomial(e), c))
            .collect();
        Polynomial {
            p,
            n: self.n,
            terms,
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, &c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match (c, m.degree()) {
                (_, 0) => write!(f, "{c}")?,
                (1, _) => write!(f, "{m}")?,
                _ => write!(f, "{c}*{m}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Expand `prod_k (<x, v_k> - c_k)` over `F_p`.
pub fn expand_affine_product(factors: &[(Point, u32)], p: u32, n: usize) -> Result<Polynomial> {
    if let Some((v, _)) = factors.iter().find(|(v, _)| v.dim() != n) {
        return Err(domain(format!(
            "factor vector of dimension {} in {n} variables",
            v.dim()
        )));
    }
    let mut acc = Polynomial::constant(p, n, 1);
    for (v, c) in factors {
        acc = acc.mul_affine(v.coords(), *c);
    }
    Ok(acc)
}
