//! Ground-set parameters, subsets of `[n]`, set families and their
//! characteristic vectors.
//!
//! Subsets are stored as 64-bit masks (bit `i - 1` set iff `i` is a member),
//! so ground sets are limited to `n <= 64`. Semantically a [`Subset`] is still
//! the sorted list of its members, and [`Ord`] compares those lists
//! lexicographically: `{} < {1} < {1,2} < {1,2,3} < {1,3} < {2}`.
//!
//! Every family is kept in that canonical order, which is what makes reports
//! and kernel bases reproducible.

use std::cmp::Ordering;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{domain, resource, Error, Result};
use crate::poly::Point;

/// Largest supported ground-set size.
pub const MAX_N: usize = 64;

/// Default cap on the number of sets a single enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: usize = 10_000_000;

static ENUMERATION_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_ENUMERATION_CAP);

/// Current process-wide enumeration cap.
pub fn enumeration_cap() -> usize {
    ENUMERATION_CAP.load(AtomicOrdering::Relaxed)
}

/// Replace the process-wide enumeration cap used by the uncapped
/// constructors (and everything built on them).
pub fn set_enumeration_cap(cap: usize) {
    ENUMERATION_CAP.store(cap, AtomicOrdering::Relaxed);
}

/// Deterministic trial-division primality test.
pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    if x < 4 {
        return true;
    }
    if x.is_multiple_of(2) || x.is_multiple_of(3) {
        return false;
    }
    let mut f = 5u64;
    while f.saturating_mul(f) <= x {
        if x.is_multiple_of(f) || x.is_multiple_of(f + 2) {
            return false;
        }
        f += 6;
    }
    true
}

/// Returns `alpha >= 1` with `q = p^alpha`, or `None` if `q` is not a
/// positive power of `p`.
pub fn prime_power_exponent(q: u64, p: u64) -> Option<u32> {
    if p < 2 || q < p {
        return None;
    }
    let mut rest = q;
    let mut alpha = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        alpha += 1;
    }
    (rest == 1).then_some(alpha)
}

/// Validate a field characteristic.
pub fn check_prime(p: u32) -> Result<()> {
    if is_prime(p as u64) {
        Ok(())
    } else {
        Err(domain(format!("p = {p} is not prime")))
    }
}

fn check_ground_set(n: usize) -> Result<()> {
    if n == 0 {
        return Err(domain("ground-set size n must be positive"));
    }
    if n > MAX_N {
        return Err(domain(format!("ground-set size n = {n} exceeds {MAX_N}")));
    }
    Ok(())
}

/// The parameter symbols shared by the Hilbert-function computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Params {
    pub n: usize,
    pub d: Option<usize>,
    pub p: u32,
    pub q: Option<u32>,
    pub m: usize,
}

impl Params {
    /// Validates `p` prime, `q` a power of `p` (when present) and `d <= n`.
    pub fn new(n: usize, d: Option<usize>, p: u32, q: Option<u32>, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(domain("n must be positive"));
        }
        check_prime(p)?;
        if let Some(q) = q {
            if prime_power_exponent(q as u64, p as u64).is_none() {
                return Err(domain(format!("q = {q} is not a power of p = {p}")));
            }
        }
        if let Some(d) = d {
            if d > n {
                return Err(domain(format!("d = {d} outside 0..={n}")));
            }
        }
        Ok(Params { n, d, p, q, m })
    }

    /// `min(d, n - d)`, when `d` is known.
    pub fn r(&self) -> Option<usize> {
        self.d.map(|d| d.min(self.n - d))
    }
}

/// A subset of `[n]` for `n <= 64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Subset {
    mask: u64,
}

impl Subset {
    pub const EMPTY: Subset = Subset { mask: 0 };

    /// Build from 1-based members; order and repetition in the input do not
    /// matter except that duplicates are rejected.
    pub fn from_members(members: &[usize], n: usize) -> Result<Self> {
        check_ground_set(n)?;
        let mut mask = 0u64;
        for &x in members {
            if x == 0 || x > n {
                return Err(domain(format!("member {x} outside 1..={n}")));
            }
            let bit = 1u64 << (x - 1);
            if mask & bit != 0 {
                return Err(domain(format!("member {x} repeated")));
            }
            mask |= bit;
        }
        Ok(Subset { mask })
    }

    /// Bit `i` set iff `i + 1` is a member.
    pub fn from_mask(mask: u64) -> Self {
        Subset { mask }
    }

    pub fn mask(self) -> u64 {
        self.mask
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    /// Largest member, 0 for the empty set.
    pub fn max_member(self) -> usize {
        64 - self.mask.leading_zeros() as usize
    }

    pub fn contains(self, x: usize) -> bool {
        (1..=64).contains(&x) && self.mask & (1u64 << (x - 1)) != 0
    }

    pub fn intersection_len(self, other: Subset) -> usize {
        (self.mask & other.mask).count_ones() as usize
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.mask & !other.mask == 0
    }

    /// Members in increasing order, 1-based.
    pub fn members(self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut rest = self.mask;
        while rest != 0 {
            out.push(rest.trailing_zeros() as usize + 1);
            rest &= rest - 1;
        }
        out
    }
}

impl Ord for Subset {
    fn cmp(&self, other: &Self) -> Ordering {
        let (mut a, mut b) = (self.mask, other.mask);
        loop {
            if a == b {
                return Ordering::Equal;
            }
            if a == 0 {
                return Ordering::Less;
            }
            if b == 0 {
                return Ordering::Greater;
            }
            match a.trailing_zeros().cmp(&b.trailing_zeros()) {
                Ordering::Equal => {
                    a &= a - 1;
                    b &= b - 1;
                }
                // the list whose next member is smaller sorts first
                ord => return ord,
            }
        }
    }
}

impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.members().into_iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.members().serialize(serializer)
    }
}

/// A duplicate-free family of subsets of `[n]` in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetFamily {
    n: usize,
    sets: Vec<Subset>,
}

impl SetFamily {
    /// Canonicalizes the order; duplicates and out-of-range members are
    /// rejected.
    pub fn new(n: usize, mut sets: Vec<Subset>) -> Result<Self> {
        check_ground_set(n)?;
        if let Some(bad) = sets.iter().find(|s| s.max_member() > n) {
            return Err(domain(format!("set {bad} is not a subset of [{n}]")));
        }
        sets.sort_unstable();
        if let Some(w) = sets.windows(2).find(|w| w[0] == w[1]) {
            return Err(domain(format!("duplicate set {}", w[0])));
        }
        Ok(SetFamily { n, sets })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sets(&self) -> &[Subset] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Subset> {
        self.sets.iter()
    }

    pub fn contains(&self, s: Subset) -> bool {
        self.sets.binary_search(&s).is_ok()
    }

    /// Characteristic vectors of the members, in family order.
    pub fn points(&self) -> Vec<Point> {
        self.sets.iter().map(|&s| point_of(s, self.n)).collect()
    }

    /// Render in the family text format: `n=<int>` header, then one set per
    /// line as comma-separated members; `∅` is an empty line.
    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for s in &self.sets {
            let line: Vec<String> = s.members().iter().map(|x| x.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Parse the family text format (see [`SetFamily::to_text`]).
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing `n=<int>` header".into(),
        })?;
        let n: usize = header
            .trim()
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse {
                line: 1,
                msg: format!("expected `n=<int>`, found {header:?}"),
            })?;
        check_ground_set(n)?;
        let mut sets = Vec::new();
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line.trim();
            let mut members = Vec::new();
            if !line.is_empty() {
                for tok in line.split(',') {
                    let x: usize = tok.trim().parse().map_err(|_| Error::Parse {
                        line: line_no,
                        msg: format!("bad member {tok:?}"),
                    })?;
                    members.push(x);
                }
            }
            let s = Subset::from_members(&members, n).map_err(|e| Error::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
            sets.push(s);
        }
        SetFamily::new(n, sets)
    }
}

impl Serialize for SetFamily {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.sets.serialize(serializer)
    }
}

fn point_of(s: Subset, n: usize) -> Point {
    Point::new((0..n).map(|i| ((s.mask >> i) & 1) as u32).collect())
}

/// The 0/1 characteristic vector of `s` in `F^n`.
pub fn char_vector(s: Subset, n: usize) -> Result<Point> {
    check_ground_set(n)?;
    if s.max_member() > n {
        return Err(domain(format!("set {s} has a member exceeding n = {n}")));
    }
    Ok(point_of(s, n))
}

/// Exact binomial coefficient; zero when `k < 0` or `k > n`.
pub fn binomial(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    // u128 path: acc * (n - i) stays below 2^128 whenever n <= 64
    let mut acc: u128 = 1;
    for i in 0..k {
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i as u128 + 1),
            None => return binomial_big(n, k),
        }
    }
    BigUint::from(acc)
}

fn binomial_big(n: u64, k: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn binomial_usize(n: usize, k: usize) -> Option<usize> {
    binomial(n as u64, k as i64).to_usize()
}

fn check_cardinality(count: Option<usize>, cap: usize, what: &str) -> Result<()> {
    match count {
        Some(c) if c <= cap => Ok(()),
        Some(c) => Err(resource(format!("{what} has {c} sets, cap is {cap}"))),
        None => Err(resource(format!("{what} is too large to enumerate"))),
    }
}

fn push_uniform(n: usize, d: usize, out: &mut Vec<Subset>) {
    // positions are 0-based; lexicographic combination order
    let mut comb: Vec<usize> = (0..d).collect();
    loop {
        out.push(Subset::from_mask(
            comb.iter().fold(0u64, |m, &i| m | 1 << i),
        ));
        let Some(i) = (0..d).rev().find(|&i| comb[i] < n - d + i) else {
            return;
        };
        comb[i] += 1;
        for j in i + 1..d {
            comb[j] = comb[j - 1] + 1;
        }
    }
}

/// All `d`-subsets of `[n]`, using the process-wide enumeration cap.
pub fn make_uniform_family(n: usize, d: usize) -> Result<SetFamily> {
    make_uniform_family_capped(n, d, enumeration_cap())
}

pub fn make_uniform_family_capped(n: usize, d: usize, cap: usize) -> Result<SetFamily> {
    check_ground_set(n)?;
    if d > n {
        return Err(domain(format!("d = {d} outside 0..={n}")));
    }
    check_cardinality(binomial_usize(n, d), cap, &format!("C([{n}], {d})"))?;
    let mut sets = Vec::new();
    push_uniform(n, d, &mut sets);
    Ok(SetFamily { n, sets })
}

/// All subsets `K` of `[n]` with `|K| ≡ d (mod q)`, using the process-wide
/// enumeration cap.
pub fn make_modq_family(n: usize, d: usize, q: usize) -> Result<SetFamily> {
    make_modq_family_capped(n, d, q, enumeration_cap())
}

pub fn make_modq_family_capped(n: usize, d: usize, q: usize, cap: usize) -> Result<SetFamily> {
    check_ground_set(n)?;
    if d > n {
        return Err(domain(format!("d = {d} outside 0..={n}")));
    }
    if q < 2 {
        return Err(domain(format!("modulus q = {q} must be at least 2")));
    }
    let sizes: Vec<usize> = (d % q..=n).step_by(q).collect();
    let total = sizes
        .iter()
        .try_fold(0usize, |acc, &k| acc.checked_add(binomial_usize(n, k)?));
    check_cardinality(total, cap, &format!("F({d}, {q}) over [{n}]"))?;
    let mut sets = Vec::with_capacity(total.unwrap_or(0));
    for k in sizes {
        push_uniform(n, k, &mut sets);
    }
    sets.sort_unstable();
    Ok(SetFamily { n, sets })
}

/// Every nonempty proper subset of `[n]`, in canonical order.
pub fn proper_nonempty_subsets(n: usize) -> Result<SetFamily> {
    check_ground_set(n)?;
    let count = (1usize << n.min(63)).saturating_sub(2);
    check_cardinality(
        (n < 63).then_some(count),
        enumeration_cap(),
        &format!("proper nonempty subsets of [{n}]"),
    )?;
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut sets: Vec<Subset> = (1..full).map(Subset::from_mask).collect();
    sets.sort_unstable();
    Ok(SetFamily { n, sets })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(n: usize, sets: &[&[usize]]) -> Vec<Subset> {
        sets.iter()
            .map(|s| Subset::from_members(s, n).unwrap())
            .collect()
    }

    #[test]
    fn uniform_examples() {
        let f = make_uniform_family(4, 2).unwrap();
        let expect = fam(4, &[&[1, 2], &[1, 3], &[1, 4], &[2, 3], &[2, 4], &[3, 4]]);
        assert_eq!(f.sets(), &expect[..]);
        let f = make_uniform_family(4, 0).unwrap();
        assert_eq!(f.sets(), &[Subset::EMPTY]);
        assert_eq!(make_uniform_family(6, 3).unwrap().len(), 20);
    }

    #[test]
    fn uniform_errors() {
        assert!(matches!(make_uniform_family(4, 5), Err(Error::Domain(_))));
        assert!(matches!(make_uniform_family(0, 0), Err(Error::Domain(_))));
        assert!(matches!(
            make_uniform_family_capped(10, 5, 100),
            Err(Error::Resource(_))
        ));
        assert!(make_uniform_family_capped(10, 5, 252).is_ok());
    }

    #[test]
    fn modq_examples() {
        assert_eq!(make_modq_family(4, 2, 2).unwrap().len(), 8);
        let f = make_modq_family(3, 0, 5).unwrap();
        assert_eq!(f.sets(), &[Subset::EMPTY]);
        assert!(matches!(make_modq_family(4, 1, 1), Err(Error::Domain(_))));
        assert!(matches!(
            make_modq_family_capped(6, 3, 3, 21),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn modq_six_three_three_by_enumeration() {
        // independent oracle: filter all 64 masks by popcount
        let expected: Vec<Subset> = {
            let mut v: Vec<Subset> = (0u64..64)
                .filter(|m| m.count_ones() % 3 == 0)
                .map(Subset::from_mask)
                .collect();
            v.sort();
            v
        };
        assert_eq!(expected.len(), 22);
        assert_eq!(make_modq_family(6, 3, 3).unwrap().sets(), &expected[..]);
    }

    #[test]
    fn canonical_order() {
        let mut v = fam(3, &[&[2], &[1, 3], &[1, 2, 3], &[], &[1], &[1, 2]]);
        v.sort();
        let want = fam(3, &[&[], &[1], &[1, 2], &[1, 2, 3], &[1, 3], &[2]]);
        assert_eq!(v, want);
    }

    #[test]
    fn char_vector_examples() {
        let s = Subset::from_members(&[1, 3], 4).unwrap();
        assert_eq!(char_vector(s, 4).unwrap().coords(), &[1, 0, 1, 0]);
        assert_eq!(char_vector(Subset::EMPTY, 3).unwrap().coords(), &[0, 0, 0]);
        let s = Subset::from_members(&[1, 2, 3, 4], 4).unwrap();
        assert_eq!(char_vector(s, 4).unwrap().coords(), &[1, 1, 1, 1]);
        assert!(matches!(char_vector(s, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(6, 3), BigUint::from(20u32));
        assert_eq!(binomial(20, 10), BigUint::from(184_756u32));
        assert_eq!(binomial(5, -1), BigUint::zero());
        assert_eq!(binomial(5, 6), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        // crosses the u128 fast path
        let big = binomial(200, 100);
        assert_eq!(
            big.to_string(),
            "90548514656103281165404177077484163874504589675413336841320"
        );
    }

    #[test]
    fn primes_and_powers() {
        let primes: Vec<u64> = (0..30).filter(|&x| is_prime(x)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(prime_power_exponent(8, 2), Some(3));
        assert_eq!(prime_power_exponent(9, 3), Some(2));
        assert_eq!(prime_power_exponent(6, 2), None);
        assert_eq!(prime_power_exponent(1, 2), None);
        assert!(Params::new(6, Some(3), 3, Some(9), 2).is_ok());
        assert!(Params::new(6, Some(3), 4, None, 2).is_err());
        assert!(Params::new(6, Some(3), 3, Some(6), 2).is_err());
        assert!(Params::new(6, Some(7), 3, None, 2).is_err());
    }

    #[test]
    fn family_text_roundtrip() {
        let text = "n=4\n1,3\n\n1,2\n";
        let f = SetFamily::from_text(text).unwrap();
        assert_eq!(f.sets(), &fam(4, &[&[], &[1, 2], &[1, 3]])[..]);
        assert_eq!(f.to_text(), "n=4\n\n1,2\n1,3\n");
        assert_eq!(SetFamily::from_text(&f.to_text()).unwrap(), f);
    }

    #[test]
    fn family_text_errors() {
        assert!(matches!(
            SetFamily::from_text("4\n1"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            SetFamily::from_text("n=3\n1,4"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            SetFamily::from_text("n=3\n1,x"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            SetFamily::from_text("n=3\n1,2\n2,1"),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn proper_subsets() {
        let f = proper_nonempty_subsets(3).unwrap();
        assert_eq!(f.len(), 6);
        assert!(!f.contains(Subset::EMPTY));
        assert!(!f.contains(Subset::from_mask(0b111)));
    }
}
