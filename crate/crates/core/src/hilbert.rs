//! Hilbert functions of finite point sets.
//!
//! For a point set `V ⊆ F_p^n`, `h_V(m)` is the dimension of the space of
//! functions `V -> F_p` given by polynomials of degree at most `m`. It is the
//! rank of the evaluation matrix whose rows are the points and whose columns
//! are the monomials of degree `<= m`. Because `x^p = x` on `F_p` (and
//! `x^2 = x` on 0/1 points) the columns may be restricted to monomials with
//! every exponent at most `cap = p - 1` (or `cap = 1`) without changing the
//! column space. The kernel of the same matrix is the degree-`<= m` part of
//! the vanishing ideal, written in that reduced monomial basis.
//!
//! Two closed forms are provided alongside the rank oracle: the value for a
//! complete uniform family ([`wilson_value`]) and for a family of all sets
//! whose size is `d mod q` ([`modq_value`]).

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{domain, resource, Result};
use crate::gflinalg::{kernel_from_rref, rank_mod_p, rref, FpMatrix, FpVector};
use crate::poly::{monomials_upto, Monomial, Point, Polynomial};
use crate::setfam::{binomial, check_prime, Params};

/// Largest evaluation matrix (rows times columns) that will be allocated.
pub const MAX_MATRIX_ENTRIES: usize = 1 << 28;

/// Evaluation matrix together with its row and column labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationMatrix {
    pub matrix: FpMatrix,
    pub points: Vec<Point>,
    pub monomials: Vec<Monomial>,
}

/// Number of exponent vectors of length `n`, entries `<= cap`, total `<= m`.
pub fn count_monomials(n: usize, m: usize, cap: u32) -> Option<usize> {
    // ways[t] = vectors seen so far with total exactly t
    let mut ways = vec![0usize; m + 1];
    ways[0] = 1;
    for _ in 0..n {
        let mut next = vec![0usize; m + 1];
        for (t, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for e in 0..=(cap as usize).min(m - t) {
                next[t + e] = next[t + e].checked_add(w)?;
            }
        }
        ways = next;
    }
    ways.into_iter().try_fold(0usize, |a, w| a.checked_add(w))
}

fn check_points(points: &[Point], p: u32, cap: u32) -> Result<usize> {
    check_prime(p)?;
    let first = points
        .first()
        .ok_or_else(|| domain("empty point set (dimension unknown)"))?;
    let n = first.dim();
    if n == 0 {
        return Err(domain("points must have at least one coordinate"));
    }
    if let Some(bad) = points.iter().find(|x| x.dim() != n) {
        return Err(domain(format!(
            "point {:?} has dimension {}, expected {n}",
            bad.coords(),
            bad.dim()
        )));
    }
    if let Some(bad) = points.iter().find(|x| !x.is_reduced(p)) {
        return Err(domain(format!(
            "point {:?} is not reduced mod {p}",
            bad.coords()
        )));
    }
    if cap != 1 && cap != p - 1 {
        return Err(domain(format!(
            "exponent cap must be 1 or p - 1 = {}, got {cap}",
            p - 1
        )));
    }
    if cap == 1 {
        if let Some(bad) = points.iter().find(|x| !x.is_boolean()) {
            return Err(domain(format!(
                "exponent cap 1 needs 0/1 points, found {:?}",
                bad.coords()
            )));
        }
    }
    Ok(n)
}

/// Rows are `points` in the given order, columns are
/// `monomials_upto(n, m, cap)`; entry `(i, j)` is monomial `j` at point `i`.
pub fn evaluation_matrix(points: &[Point], m: usize, p: u32, cap: u32) -> Result<EvaluationMatrix> {
    let n = check_points(points, p, cap)?;
    let cols = count_monomials(n, m, cap).ok_or_else(|| resource("monomial count overflows"))?;
    match cols.checked_mul(points.len()) {
        Some(e) if e <= MAX_MATRIX_ENTRIES => {}
        _ => {
            return Err(resource(format!(
                "evaluation matrix {} x {cols} exceeds {MAX_MATRIX_ENTRIES} entries",
                points.len()
            )))
        }
    }
    let monomials = monomials_upto(n, m, cap);
    debug_assert_eq!(monomials.len(), cols);
    let mut matrix = FpMatrix::zeros(p, points.len(), cols);

    if cap == 1 && n <= 64 {
        // support containment decides every entry
        let mono_masks: Vec<u64> = monomials
            .iter()
            .map(|mo| support_mask(mo.exponents()))
            .collect();
        for (i, x) in points.iter().enumerate() {
            let xm = support_mask(x.coords());
            for (j, &mm) in mono_masks.iter().enumerate() {
                if mm & !xm == 0 {
                    matrix.set(i, j, 1);
                }
            }
        }
    } else {
        for (i, x) in points.iter().enumerate() {
            for (j, mo) in monomials.iter().enumerate() {
                matrix.set(i, j, mo.eval(x.coords(), p));
            }
        }
    }
    Ok(EvaluationMatrix {
        matrix,
        points: points.to_vec(),
        monomials,
    })
}

fn support_mask(v: &[u32]) -> u64 {
    v.iter()
        .enumerate()
        .filter(|(_, &e)| e != 0)
        .fold(0u64, |acc, (i, _)| acc | 1 << i)
}

/// `h(m)` for the point set, computed as the rank of its evaluation matrix.
pub fn hilbert_value(points: &[Point], m: usize, p: u32, cap: u32) -> Result<usize> {
    let e = evaluation_matrix(points, m, p, cap)?;
    Ok(rank_mod_p(&e.matrix))
}

/// `h(0), h(1), ...` up to and including the first `m` at which `h(m)`
/// equals the number of distinct points.
pub fn hilbert_series(points: &[Point], p: u32, cap: u32) -> Result<Vec<usize>> {
    let n = check_points(points, p, cap)?;
    let distinct = points.iter().collect::<HashSet<_>>().len();
    let top = n * cap as usize;
    let mut out = Vec::new();
    for m in 0..=top {
        let h = hilbert_value(points, m, p, cap)?;
        out.push(h);
        if h == distinct {
            break;
        }
    }
    Ok(out)
}

/// Degree-`<= m` slice of the vanishing ideal, together with the matrix it
/// was computed from and the Hilbert value.
#[derive(Debug, Clone)]
pub struct IdealTruncation {
    pub eval: EvaluationMatrix,
    pub h: usize,
    pub kernel: Vec<FpVector>,
}

impl IdealTruncation {
    pub fn compute(points: &[Point], m: usize, p: u32, cap: u32) -> Result<Self> {
        let eval = evaluation_matrix(points, m, p, cap)?;
        let (r, pivots) = rref(&eval.matrix);
        let kernel = kernel_from_rref(&r, &pivots);
        Ok(IdealTruncation {
            h: pivots.len(),
            eval,
            kernel,
        })
    }

    pub fn dim(&self) -> usize {
        self.kernel.len()
    }

    pub fn monomial_count(&self) -> usize {
        self.eval.monomials.len()
    }

    pub fn polynomial(&self, idx: usize) -> Polynomial {
        let n = self.eval.points[0].dim();
        Polynomial::from_coefficients(
            self.eval.matrix.p(),
            n,
            &self.eval.monomials,
            self.kernel[idx].values(),
        )
    }

    pub fn polynomials(&self) -> Vec<Polynomial> {
        (0..self.kernel.len()).map(|i| self.polynomial(i)).collect()
    }
}

/// A basis of the polynomials of degree `<= m` (in the reduced monomial
/// basis) vanishing on every point.
pub fn ideal_truncation_basis(
    points: &[Point],
    m: usize,
    p: u32,
    cap: u32,
) -> Result<Vec<Polynomial>> {
    Ok(IdealTruncation::compute(points, m, p, cap)?.polynomials())
}

/// `C(n, m)`: the Hilbert value of the complete `d`-uniform family on `[n]`,
/// valid for `0 <= m <= min(d, n - d)` over any field.
pub fn wilson_value(n: usize, d: usize, m: usize) -> Result<BigUint> {
    if d > n {
        return Err(domain(format!("d = {d} outside 0..={n}")));
    }
    let r = d.min(n - d);
    if m > r {
        return Err(domain(format!(
            "m = {m} outside 0..=min(d, n - d) = {r}; the closed form does not apply"
        )));
    }
    Ok(binomial(n as u64, m as i64))
}

/// Closed form of `h(m)` for `{K ⊆ [n] : |K| ≡ d (mod q)}`, with
/// `r = min(d, n - d)`:
///
/// * `m <= r`: `sum_{i=0}^{floor(m/q)} C(n, m - iq)`
/// * `m > r`: `sum_{i=-floor(r/q)}^{floor((n-r)/q)} C(n, r + iq)
///   - sum_{i=1}^{floor((n-m)/q)} C(n, m + iq)`
///
/// Sums whose upper index is below the lower one are empty.
pub fn modq_value(n: usize, d: usize, q: usize, m: usize) -> Result<BigUint> {
    if d > n {
        return Err(domain(format!("d = {d} outside 0..={n}")));
    }
    if q < 2 {
        return Err(domain(format!("modulus q = {q} must be at least 2")));
    }
    let (n, q, m) = (n as i64, q as i64, m as i64);
    let r = (d as i64).min(n - d as i64);
    let c = |k: i64| BigInt::from(binomial(n as u64, k));
    let value: BigInt = if m <= r {
        (0..=m / q).map(|i| c(m - i * q)).sum()
    } else {
        let total: BigInt = (-(r / q)..=(n - r).div_euclid(q))
            .map(|i| c(r + i * q))
            .sum();
        let upper = (n - m).div_euclid(q);
        let tail: BigInt = (1..=upper).map(|i| c(m + i * q)).sum();
        total - tail
    };
    if value.is_negative() {
        return Err(domain(format!("closed form is negative ({value})")));
    }
    Ok(value.to_biguint().unwrap_or_else(BigUint::zero))
}

/// Oracle and closed-form Hilbert values at one degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HilbertReport {
    #[serde(flatten)]
    pub params: Params,
    pub cap: u32,
    pub h_oracle: usize,
    pub h_closed_form: Option<u128>,
    pub ideal_dim: usize,
    pub r: Option<usize>,
    #[serde(rename = "match")]
    pub matches: Option<bool>,
}

impl HilbertReport {
    pub fn compute(
        params: Params,
        points: &[Point],
        cap: u32,
        closed_form: Option<BigUint>,
    ) -> Result<Self> {
        let e = evaluation_matrix(points, params.m, params.p, cap)?;
        let h = rank_mod_p(&e.matrix);
        let h_closed_form = closed_form
            .map(|v| {
                v.to_u128()
                    .ok_or_else(|| resource(format!("closed form {v} overflows u128")))
            })
            .transpose()?;
        Ok(HilbertReport {
            params,
            cap,
            h_oracle: h,
            h_closed_form,
            ideal_dim: e.monomials.len() - h,
            r: params.r(),
            matches: h_closed_form.map(|v| v == h as u128),
        })
    }
}
