//! L-balancing families.
//!
//! For `n = 2d` and `L ⊆ {1, ..., d-1}`, a family `F` of subsets of `[n]` is
//! L-balancing when every `d`-subset `X` meets some member `G ∈ F` in a number
//! of elements that lies in `L`. The existential ranges over the members of
//! the family.
//!
//! When `n = 2p` with `p` prime, the product
//! `P(x) = prod_{G ∈ F} prod_{l ∈ L} (<x, v_G> - l)` has degree at most
//! `|F| * |L|`, takes the value `prod_l (-l)^|F|` at the origin and vanishes
//! on every `p`-subset, so the degree bound for such polynomials forces `2 * |L| * |F| >= n`.
//! [`check_lower_bound`] verifies each ingredient of that argument for a
//! concrete family; [`min_balancing_size`] searches for the smallest family.

use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::error::{domain, resource, Result};
use crate::gflinalg::{mul_mod, neg_mod, pow_mod};
use crate::hilbert::count_monomials;
use crate::poly::{expand_affine_product, Point, Polynomial};
use crate::setfam::{
    char_vector, check_prime, enumeration_cap, make_uniform_family, proper_nonempty_subsets,
    SetFamily, Subset,
};
use crate::theorems::{Claim, Status, VerificationReport, Witness};

const MEMBER_NOTE: &str = "the set G in the balancing condition ranges over family members";

fn check_levels(n: usize, levels: &[u32]) -> Result<Vec<u32>> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(domain(format!(
            "ground-set size n = {n} must be even and positive"
        )));
    }
    let d = (n / 2) as u32;
    if levels.is_empty() {
        return Err(domain("L must be nonempty"));
    }
    let mut l = levels.to_vec();
    l.sort_unstable();
    if l.windows(2).any(|w| w[0] == w[1]) {
        return Err(domain("L has repeated values"));
    }
    if let Some(bad) = l.iter().find(|&&x| x == 0 || x >= d) {
        return Err(domain(format!(
            "L value {bad} outside 1..={}",
            d as i64 - 1
        )));
    }
    Ok(l)
}

/// Bit `k` set iff `k ∈ L`.
fn level_mask(levels: &[u32]) -> u64 {
    levels.iter().fold(0, |m, &l| m | 1 << l)
}

fn covers(x: Subset, g: Subset, mask: u64) -> bool {
    mask >> x.intersection_len(g) & 1 == 1
}

/// Ground set `[n]` with `n = 2d`, intersection sizes `L` and a family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancingInstance {
    n: usize,
    levels: Vec<u32>,
    family: SetFamily,
}

impl BalancingInstance {
    pub fn new(n: usize, levels: &[u32], family: SetFamily) -> Result<Self> {
        let levels = check_levels(n, levels)?;
        if family.n() != n {
            return Err(domain(format!(
                "family lives on [{}], instance on [{n}]",
                family.n()
            )));
        }
        Ok(BalancingInstance { n, levels, family })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.n / 2
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    /// `s = |L|`.
    pub fn s(&self) -> usize {
        self.levels.len()
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }
}

/// Whether every `d`-subset is met in a size from `L` by some member; if
/// not, the lexicographically first uncovered `d`-subset.
pub fn is_balancing(inst: &BalancingInstance) -> Result<(bool, Option<Subset>)> {
    let mask = level_mask(&inst.levels);
    let targets = make_uniform_family(inst.n, inst.d())?;
    let uncovered = targets
        .iter()
        .find(|&&x| !inst.family.iter().any(|&g| covers(x, g, mask)))
        .copied();
    Ok((uncovered.is_none(), uncovered))
}

fn check_witness_params(inst: &BalancingInstance, p: u32) -> Result<()> {
    check_prime(p)?;
    if inst.n != 2 * p as usize {
        return Err(domain(format!(
            "witness polynomial needs n = 2p, got n = {}, p = {p}",
            inst.n
        )));
    }
    // L ⊆ [d-1] = [p-1] holds by construction once n = 2p
    Ok(())
}

/// `prod_{G} prod_{l ∈ L} (<x, v_G> - l)` over `F_p`, members in family
/// order and `L` ascending.
pub fn witness_poly(inst: &BalancingInstance, p: u32) -> Result<Polynomial> {
    check_witness_params(inst, p)?;
    let m = inst.family.len();
    let deg = m * inst.s();
    // the expansion has at most C(n + deg, deg) terms
    let bound = count_monomials(inst.n, deg, deg as u32);
    if bound.is_none_or(|b| b > enumeration_cap()) {
        return Err(resource(format!(
            "expanding a degree-{deg} product in {} variables",
            inst.n
        )));
    }
    let mut factors: Vec<(Point, u32)> = Vec::with_capacity(deg);
    for &g in inst.family.iter() {
        let v = char_vector(g, inst.n)?;
        for &l in &inst.levels {
            factors.push((v.clone(), l));
        }
    }
    expand_affine_product(&factors, p, inst.n)
}

/// Check the lower bound `2 s m >= n` for a concrete family, together with
/// the certificate behind it: `deg P <= m s`, `P(0) = (prod L)^m != 0` and
/// `P(v_X) = 0` for every `p`-subset `X`.
pub fn check_lower_bound(inst: &BalancingInstance, p: u32) -> Result<VerificationReport> {
    let started = Instant::now();
    check_prime(p)?;
    let m = inst.family.len();
    let s = inst.s();
    let mut rep = VerificationReport::new(
        Claim::Main3,
        json!({"n": inst.n, "p": p, "L": inst.levels, "family": inst.family, "m": m, "s": s}),
        started,
    );
    rep.notes.push(MEMBER_NOTE.into());
    if inst.n != 2 * p as usize {
        rep.status = Status::NotApplicable;
        rep.notes.push(format!(
            "the bound is stated for n = 2p; n = {} with p = {p}",
            inst.n
        ));
        return Ok(rep.finish(started));
    }
    let (balancing, uncovered) = is_balancing(inst)?;
    rep.metric("balancing", balancing);
    if !balancing {
        rep.status = Status::NotApplicable;
        rep.witnesses = uncovered.map(|set| Witness::UncoveredSet { set });
        return Ok(rep.finish(started));
    }

    let poly = witness_poly(inst, p)?;
    let origin_expected = pow_mod(
        inst.levels
            .iter()
            .fold(1, |acc, &l| mul_mod(acc, neg_mod(l % p, p), p)),
        m as u64,
        p,
    );
    let origin = poly.evaluate(&Point::origin(inst.n))?;
    let targets = make_uniform_family(inst.n, p as usize)?;
    let mut nonvanishing = None;
    for &x in targets.iter() {
        let pt = char_vector(x, inst.n)?;
        let v = poly.evaluate(&pt)?;
        if v != 0 {
            nonvanishing = Some((pt, v));
            break;
        }
    }
    let bound_lhs = 2 * s * m;
    let degree_ok = poly.degree().at_most((m * s) as u64);

    rep.metric("bound_lhs", bound_lhs);
    rep.metric("bound_rhs", inst.n);
    rep.metric("degree", poly.degree());
    rep.metric("degree_bound", m * s);
    rep.metric("p_at_origin", origin);
    rep.metric("p_at_origin_expected", origin_expected);
    rep.metric("terms", poly.num_terms());
    rep.metric("points_checked", targets.len());
    rep.metric("witness_polynomial", &poly);

    if let Some((point, value)) = nonvanishing {
        rep.status = Status::Fail;
        rep.witnesses = Some(Witness::Polynomial {
            polynomial: poly,
            degree_bound: (m * s) as u64,
            point,
            value,
        });
    } else if origin == 0 || origin != origin_expected {
        rep.status = Status::Fail;
        rep.witnesses = Some(Witness::ValueMismatch {
            quantity: "p_at_origin".into(),
            expected: origin_expected as u128,
            found: origin as u128,
        });
    } else if !degree_ok {
        rep.status = Status::Fail;
        rep.witnesses = Some(Witness::ValueMismatch {
            quantity: "degree".into(),
            expected: (m * s) as u128,
            found: poly.degree().finite().map_or(0, u128::from),
        });
    } else if bound_lhs < inst.n {
        rep.status = Status::Fail;
        rep.witnesses = Some(Witness::ValueMismatch {
            quantity: "2sm".into(),
            expected: inst.n as u128,
            found: bound_lhs as u128,
        });
    }
    Ok(rep.finish(started))
}

/// Outcome of [`min_balancing_size`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub minimum_size: Option<usize>,
    pub witness_family: Option<SetFamily>,
    pub explored: u64,
    pub limit_hit: bool,
}

struct Search<'a> {
    targets: Vec<Subset>,
    pool: &'a [Subset],
    mask: u64,
    chosen: Vec<Subset>,
    explored: u64,
}

impl Search<'_> {
    fn first_uncovered(&self) -> Option<Subset> {
        self.targets
            .iter()
            .find(|&&x| !self.chosen.iter().any(|&g| covers(x, g, self.mask)))
            .copied()
    }

    fn dfs(&mut self, budget: usize) -> bool {
        self.explored += 1;
        let Some(x) = self.first_uncovered() else {
            return true;
        };
        if budget == 0 {
            return false;
        }
        for &g in self.pool {
            // any completion must cover x, so only members that do are tried
            if !covers(x, g, self.mask) {
                continue;
            }
            self.chosen.push(g);
            if self.dfs(budget - 1) {
                return true;
            }
            self.chosen.pop();
        }
        false
    }
}

/// Smallest L-balancing family over `[n]` of size at most `size_limit`,
/// members drawn from all nonempty proper subsets.
pub fn min_balancing_size(n: usize, levels: &[u32], size_limit: usize) -> Result<SearchResult> {
    let pool = proper_nonempty_subsets(n)?;
    min_balancing_size_in(n, levels, size_limit, pool.sets())
}

/// As [`min_balancing_size`] with members restricted to `pool` (tried in the
/// given order).
pub fn min_balancing_size_in(
    n: usize,
    levels: &[u32],
    size_limit: usize,
    pool: &[Subset],
) -> Result<SearchResult> {
    let levels = check_levels(n, levels)?;
    if size_limit == 0 {
        return Err(domain("size limit must be at least 1"));
    }
    if let Some(bad) = pool.iter().find(|s| s.max_member() > n) {
        return Err(domain(format!("candidate {bad} is not a subset of [{n}]")));
    }
    let mut search = Search {
        targets: make_uniform_family(n, n / 2)?.sets().to_vec(),
        pool,
        mask: level_mask(&levels),
        chosen: Vec::new(),
        explored: 0,
    };
    for k in 1..=size_limit {
        search.chosen.clear();
        if search.dfs(k) {
            let family = SetFamily::new(n, search.chosen.clone())?;
            return Ok(SearchResult {
                minimum_size: Some(family.len()),
                witness_family: Some(family),
                explored: search.explored,
                limit_hit: false,
            });
        }
    }
    Ok(SearchResult {
        minimum_size: None,
        witness_family: None,
        explored: search.explored,
        limit_hit: true,
    })
}
