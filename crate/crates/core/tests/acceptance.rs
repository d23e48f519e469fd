//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails. All checks are exact; time limits are part of
//! the criteria.
//!
//! Run alone with `cargo test -p hilbfam --test acceptance`.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestRunner};

use hilbfam::balancing::{check_lower_bound, min_balancing_size, BalancingInstance};
use hilbfam::gflinalg::{kernel_basis, rank_mod_p, FpMatrix};
use hilbfam::hilbert::{hilbert_value, ideal_truncation_basis, modq_value, wilson_value};
use hilbfam::poly::{Point, Polynomial};
use hilbfam::setfam::{binomial, make_modq_family, make_uniform_family, SetFamily, Subset};
use hilbfam::theorems::{
    verify_grid_remark, verify_hlemma, verify_hrubes, verify_ideal_truncation_equality,
    verify_main2, GridInstance, Status,
};

type Outcome = Result<String, String>;

struct Criterion {
    id: &'static str,
    what: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const MODQ_PAIRS: [(u32, u32); 3] = [(2, 2), (2, 4), (3, 3)];

fn wilson_consistency() -> Outcome {
    let mut checked = 0;
    for p in [2u32, 3, 5] {
        for n in 1..=8usize {
            for d in 0..=n {
                let pts = make_uniform_family(n, d).unwrap().points();
                for m in 0..=d.min(n - d) {
                    let h = hilbert_value(&pts, m, p, 1).unwrap();
                    let want = binomial(n as u64, m as i64);
                    ensure(want == h.into(), || {
                        format!("p={p} n={n} d={d} m={m}: h={h}, C(n,m)={want}")
                    })?;
                    ensure(wilson_value(n, d, m).unwrap() == want, || {
                        format!("wilson_value n={n} d={d} m={m}")
                    })?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} (p, n, d, m) cases"))
}

fn modq_closed_form() -> Outcome {
    let mut checked = 0;
    let mut low_branch = Vec::new();
    let mut high_branch = Vec::new();
    for (p, q) in MODQ_PAIRS {
        for n in 1..=8usize {
            for d in 0..=n {
                let pts = make_modq_family(n, d, q as usize).unwrap().points();
                for m in 0..=n {
                    let h = hilbert_value(&pts, m, p, 1).unwrap();
                    let cf = modq_value(n, d, q as usize, m).unwrap();
                    if cf != h.into() {
                        let case =
                            format!("(p={p} q={q} n={n} d={d} m={m}: oracle {h}, formula {cf})");
                        if m <= d.min(n - d) {
                            low_branch.push(case);
                        } else {
                            high_branch.push(case);
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    ensure(low_branch.is_empty() && high_branch.is_empty(), || {
        format!(
            "{} of {checked} cases differ; m <= r: {}; m > r: {} e.g. {}",
            low_branch.len() + high_branch.len(),
            low_branch.len(),
            high_branch.len(),
            high_branch
                .iter()
                .chain(&low_branch)
                .take(3)
                .cloned()
                .collect::<Vec<_>>()
                .join(" ")
        )
    })?;
    Ok(format!("{checked} (p, q, n, d, m) cases"))
}

fn main2_params() -> Vec<(usize, usize, u32, u32)> {
    let mut out = Vec::new();
    for (p, q) in MODQ_PAIRS {
        let qm1 = q as usize - 1;
        for n in 1..=9usize {
            for d in qm1..=n {
                if d + qm1 <= n {
                    out.push((n, d, q, p));
                }
            }
        }
    }
    out
}

fn main2_sweep() -> Outcome {
    let params = main2_params();
    for &(n, d, q, p) in &params {
        let rep = verify_main2(n, d, q, p).map_err(|e| e.to_string())?;
        ensure(rep.status == Status::Pass, || {
            format!("n={n} d={d} q={q} p={p}: {:?}", rep.status)
        })?;
    }
    Ok(format!("{} parameter sets PASS", params.len()))
}

fn hrubes_lemma() -> Outcome {
    let mut dims = Vec::new();
    for p in [2, 3, 5] {
        let started = Instant::now();
        let rep = verify_hrubes(p).map_err(|e| e.to_string())?;
        ensure(rep.status == Status::Pass, || {
            format!("p={p}: {:?}", rep.status)
        })?;
        if p == 5 {
            ensure(
                rep.metrics["matrix_rows"] == 252 && rep.metrics["matrix_cols"] == 386,
                || {
                    format!(
                        "p=5 shape {}x{}",
                        rep.metrics["matrix_rows"], rep.metrics["matrix_cols"]
                    )
                },
            )?;
            let t = started.elapsed();
            ensure(t < Duration::from_secs(5), || format!("p=5 took {t:?}"))?;
        }
        dims.push(format!("p={p}: kernel {}", rep.metrics["ideal_dim"]));
    }
    Ok(dims.join(", "))
}

fn hlemma() -> Outcome {
    let mut notes = Vec::new();
    for p in [2, 3] {
        let started = Instant::now();
        let rep = verify_hlemma(p).map_err(|e| e.to_string())?;
        ensure(rep.status == Status::Pass, || {
            format!("p={p}: {:?}", rep.status)
        })?;
        if p == 3 {
            ensure(
                rep.metrics["matrix_rows"] == 924 && rep.metrics["matrix_cols"] == 79,
                || "p=3 shape".into(),
            )?;
            let t = started.elapsed();
            ensure(t < Duration::from_secs(5), || format!("p=3 took {t:?}"))?;
        }
        notes.push(format!(
            "p={p}: {}x{}",
            rep.metrics["matrix_rows"], rep.metrics["matrix_cols"]
        ));
    }
    Ok(notes.join(", "))
}

fn truncation_chain() -> Outcome {
    let params = main2_params();
    for &(n, d, q, p) in &params {
        let qm1 = q as usize - 1;
        let f = make_uniform_family(n, d).unwrap().points();
        let g = make_modq_family(n, d, q as usize).unwrap().points();
        let rep = verify_ideal_truncation_equality(&f, &g, qm1, p, 1).map_err(|e| e.to_string())?;
        ensure(rep.status == Status::Pass, || {
            format!("n={n} d={d} q={q} p={p}: {:?}", rep.status)
        })?;
        let closed_equal =
            wilson_value(n, d, qm1).unwrap() == modq_value(n, d, q as usize, qm1).unwrap();
        ensure(closed_equal, || {
            format!("closed forms differ at n={n} d={d} q={q}")
        })?;
        // the chain: equality PASS and equal closed forms imply the vanishing statement
        let main2 = verify_main2(n, d, q, p).map_err(|e| e.to_string())?;
        ensure(main2.status == Status::Pass, || {
            format!("implication broken at n={n} d={d} q={q}")
        })?;
        ensure(
            rep.metrics["ideal_dim_f"] == main2.metrics["ideal_dim"],
            || "kernel dims differ".into(),
        )?;
    }
    Ok(format!("{} chains", params.len()))
}

fn subsets_of_field(p: u32, size: usize) -> Vec<Vec<u32>> {
    (0u32..1 << p)
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| (0..p).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

fn grid_remark() -> Outcome {
    let mut count = 0;
    for p in [2u32, 3] {
        let choices: Vec<Vec<u32>> = (2..=p as usize)
            .flat_map(|t| subsets_of_field(p, t))
            .collect();
        for n in 1..=3usize {
            let mut idx = vec![0usize; n];
            loop {
                let sets: Vec<Vec<u32>> = idx.iter().map(|&i| choices[i].clone()).collect();
                let expected: usize = sets.iter().map(Vec::len).product::<usize>() - 1;
                let any_w = Point::new(sets.iter().map(|t| t[0]).collect());
                let grid = GridInstance::new(p, sets.clone(), any_w)
                    .unwrap()
                    .points()
                    .unwrap();
                for w in grid {
                    let g = GridInstance::new(p, sets.clone(), w.clone()).unwrap();
                    let rep = verify_grid_remark(&g).map_err(|e| e.to_string())?;
                    ensure(rep.status == Status::Pass, || {
                        format!("p={p} sets={sets:?} w={:?}", w.coords())
                    })?;
                    ensure(
                        rep.metrics["h_punctured"] == expected && rep.metrics["h_grid"] == expected,
                        || format!("h values at p={p} sets={sets:?}"),
                    )?;
                    count += 1;
                }
                let Some(k) = (0..n).rev().find(|&k| idx[k] + 1 < choices.len()) else {
                    break;
                };
                idx[k] += 1;
                idx[k + 1..].iter_mut().for_each(|i| *i = 0);
            }
        }
    }
    Ok(format!("{count} grid instances"))
}

/// Independent balancing test on raw masks.
fn brute_balancing(n: usize, levels: &[u32], fam: &[u64]) -> bool {
    (0u64..1 << n)
        .filter(|x| x.count_ones() as usize == n / 2)
        .all(|x| fam.iter().any(|g| levels.contains(&(x & g).count_ones())))
}

fn balancing_bound() -> Outcome {
    let r = min_balancing_size(4, &[1], 3).map_err(|e| e.to_string())?;
    ensure(r.minimum_size == Some(2), || {
        format!("n=4 L={{1}}: {:?}", r.minimum_size)
    })?;
    // bound n / (2s) = 4 / 2 = 2
    let mut summary = vec!["n=4 L={1}: min 2 = bound".to_string()];

    let p = 3u32;
    let n = 6usize;
    let pool: Vec<u64> = (1u64..(1 << n) - 1).collect();
    for levels in [vec![1u32], vec![2], vec![1, 2]] {
        let s = levels.len();
        let mut balancing = 0usize;
        for size in 1..=3usize {
            let mut idx: Vec<usize> = (0..size).collect();
            loop {
                let fam: Vec<u64> = idx.iter().map(|&i| pool[i]).collect();
                if brute_balancing(n, &levels, &fam) {
                    balancing += 1;
                    ensure(2 * s * size >= n, || {
                        format!("L={levels:?}: balancing family of size {size}")
                    })?;
                    let family =
                        SetFamily::new(n, fam.iter().map(|&m| Subset::from_mask(m)).collect())
                            .unwrap();
                    let inst = BalancingInstance::new(n, &levels, family).unwrap();
                    let rep = check_lower_bound(&inst, p).map_err(|e| e.to_string())?;
                    ensure(rep.status == Status::Pass, || {
                        format!("L={levels:?} fam={fam:?}: {:?}", rep.status)
                    })?;
                    ensure(rep.metrics["p_at_origin"] != 0, || "P(0) = 0".into())?;
                    ensure(
                        rep.metrics["degree"].as_u64().unwrap() <= (size * s) as u64,
                        || "deg P".into(),
                    )?;
                }
                let Some(k) = (0..size).rev().find(|&k| idx[k] < pool.len() - size + k) else {
                    break;
                };
                idx[k] += 1;
                for j in k + 1..size {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
        let search = min_balancing_size(n, &levels, 3).map_err(|e| e.to_string())?;
        if let Some(mn) = search.minimum_size {
            ensure(2 * s * mn >= n, || {
                format!("search minimum {mn} below bound")
            })?;
        }
        summary.push(format!(
            "p=3 L={levels:?}: {balancing} balancing families <= 3, search min {:?}",
            search.minimum_size
        ));
    }
    Ok(summary.join("; "))
}

fn seeded(seed: u64, cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    })
}

fn cube_points(n: usize) -> Vec<Point> {
    (0u32..1 << n)
        .map(|mask| Point::new((0..n).map(|i| (mask >> i) & 1).collect()))
        .collect()
}

fn random_family(n: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::btree_set(0u64..(1 << n), 1..(1usize << n).min(24)).prop_map(move |set| {
        set.into_iter()
            .map(|m| Point::new((0..n).map(|i| ((m >> i) & 1) as u32).collect()))
            .collect()
    })
}

fn property_suites() -> Outcome {
    let primes = prop::sample::select(vec![2u32, 3, 5]);

    // rank-nullity and kernel vanishing on random matrices
    seeded(11, 300)
        .run(
            &(primes.clone(), 0usize..8, 0usize..10).prop_flat_map(|(p, r, c)| {
                (
                    Just(p),
                    Just(r),
                    Just(c),
                    prop::collection::vec(0..p, r * c),
                )
            }),
            |(p, r, c, data)| {
                let m = FpMatrix::from_vec(p, r, c, data).unwrap();
                let k = kernel_basis(&m);
                prop_assert_eq!(rank_mod_p(&m) + k.len(), c);
                for v in &k {
                    prop_assert!(m.mul_vec(v).unwrap().is_zero());
                }
                Ok(())
            },
        )
        .map_err(|e| format!("{e}"))?;

    // monotone, stabilizing Hilbert series; permutation invariance; vanishing
    seeded(12, 120)
        .run(
            &(1usize..=6, primes.clone())
                .prop_flat_map(|(n, p)| (random_family(n), Just(p), Just(n).prop_shuffle_perm())),
            |(pts, p, perm)| {
                let n = pts[0].dim();
                let hs: Vec<usize> = (0..=n + 1)
                    .map(|m| hilbert_value(&pts, m, p, 1).unwrap())
                    .collect();
                prop_assert!(hs.windows(2).all(|w| w[0] <= w[1]));
                prop_assert!(hs[n..].iter().all(|&h| h == pts.len()));
                let permuted: Vec<Point> = pts
                    .iter()
                    .map(|x| Point::new(perm.iter().map(|&i| x.coords()[i]).collect()))
                    .collect();
                for (m, &h) in hs.iter().enumerate().take(n + 1) {
                    prop_assert_eq!(hilbert_value(&permuted, m, p, 1).unwrap(), h);
                    let basis = ideal_truncation_basis(&pts, m, p, 1).unwrap();
                    for f in &basis {
                        for x in &pts {
                            prop_assert_eq!(f.evaluate(x).unwrap(), 0);
                        }
                    }
                }
                Ok(())
            },
        )
        .map_err(|e| format!("{e}"))?;

    // identity block: h(m) = C(n, d) for m >= d
    for n in 1..=7usize {
        for d in 0..=n {
            let pts = make_uniform_family(n, d).unwrap().points();
            for m in d..=n {
                let h = hilbert_value(&pts, m, 3, 1).unwrap();
                ensure(binomial(n as u64, d as i64) == h.into(), || {
                    format!("identity block n={n} d={d} m={m}")
                })?;
            }
        }
    }

    // multilinear reduction agrees with the original on the cube, n <= 10
    seeded(13, 60)
        .run(
            &(1usize..=10, primes).prop_flat_map(|(n, p)| {
                (
                    Just(p),
                    Just(n),
                    prop::collection::vec((prop::collection::vec(0u32..4, n), 0..p as i64), 0..10),
                )
            }),
            |(p, n, terms)| {
                let f = Polynomial::from_terms(p, n, terms).unwrap();
                let g = f.multilinear_reduce();
                prop_assert!(g.degree() <= f.degree());
                for x in cube_points(n) {
                    prop_assert_eq!(f.evaluate(&x).unwrap(), g.evaluate(&x).unwrap());
                }
                Ok(())
            },
        )
        .map_err(|e| format!("{e}"))?;

    Ok("rank-nullity, monotonicity/stabilization, identity block, permutation, reduction, vanishing".into())
}

/// The permutation strategy helper used above.
trait ShufflePerm {
    fn prop_shuffle_perm(self) -> BoxedStrategy<Vec<usize>>;
}

impl ShufflePerm for Just<usize> {
    fn prop_shuffle_perm(self) -> BoxedStrategy<Vec<usize>> {
        let n = self.0;
        Just((0..n).collect::<Vec<usize>>()).prop_shuffle().boxed()
    }
}

fn strip_timing(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            map.remove("timing");
            map.values_mut().for_each(strip_timing);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_hilbfam");
    let run = |extra: &[&str]| {
        let out = Command::new(bin)
            .args(["verify", "all", "--p-max", "3"])
            .args(extra)
            .env_remove("HILBFAM_ENUM_CAP")
            .output()
            .expect("binary runs");
        (out.status.code(), out.stdout)
    };
    let (c1, a) = run(&["--no-timing"]);
    let (c2, b) = run(&["--no-timing"]);
    ensure(c1 == Some(0) && c2 == Some(0), || {
        format!("exit codes {c1:?} {c2:?}")
    })?;
    ensure(a == b, || "byte-different --no-timing output".into())?;
    let (_, t1) = run(&[]);
    let (_, t2) = run(&[]);
    let mut v1: serde_json::Value = serde_json::from_slice(&t1).map_err(|e| e.to_string())?;
    let mut v2: serde_json::Value = serde_json::from_slice(&t2).map_err(|e| e.to_string())?;
    strip_timing(&mut v1);
    strip_timing(&mut v2);
    ensure(v1 == v2, || "timed runs differ outside timing".into())?;
    let parsed: serde_json::Value = serde_json::from_slice(&a).unwrap();
    ensure(v1 == parsed, || "timed and untimed bodies differ".into())?;
    Ok(format!(
        "{} reports, {} bytes, identical",
        parsed["summary"]["total"],
        a.len()
    ))
}

fn main() {
    let criteria = [
        Criterion {
            id: "1",
            what: "Wilson consistency",
            limit: Duration::from_secs(60),
            run: wilson_consistency,
        },
        Criterion {
            id: "2",
            what: "mod-q closed form, both branches",
            limit: Duration::from_secs(120),
            run: modq_closed_form,
        },
        Criterion {
            id: "3",
            what: "low-degree vanishing extends to F(d,q)",
            limit: Duration::from_secs(120),
            run: main2_sweep,
        },
        Criterion {
            id: "4",
            what: "degree bound on C([2p],p) with f(0) != 0",
            limit: Duration::from_secs(60),
            run: hrubes_lemma,
        },
        Criterion {
            id: "5",
            what: "degree bound for C([4p],2p) vs 3p",
            limit: Duration::from_secs(60),
            run: hlemma,
        },
        Criterion {
            id: "6",
            what: "ideal truncation equality chain",
            limit: Duration::from_secs(120),
            run: truncation_chain,
        },
        Criterion {
            id: "7",
            what: "punctured grid",
            limit: Duration::from_secs(120),
            run: grid_remark,
        },
        Criterion {
            id: "8",
            what: "L-balancing lower bound and certificate",
            limit: Duration::from_secs(60),
            run: balancing_bound,
        },
        Criterion {
            id: "9",
            what: "property suites (fixed seeds)",
            limit: Duration::from_secs(300),
            run: property_suites,
        },
        Criterion {
            id: "10",
            what: "CLI batch determinism",
            limit: Duration::from_secs(300),
            run: determinism,
        },
    ];
    let mut failed = BTreeSet::new();
    for c in &criteria {
        let started = Instant::now();
        let outcome = (c.run)();
        let elapsed = started.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => {
                Err(format!("{detail}; took {elapsed:?} > {:?}", c.limit))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!(
                "criterion {:>2} PASS  {} [{:.2}s] {detail}",
                c.id,
                c.what,
                elapsed.as_secs_f64()
            ),
            Err(why) => {
                println!(
                    "criterion {:>2} FAIL  {} [{:.2}s] {why}",
                    c.id,
                    c.what,
                    elapsed.as_secs_f64()
                );
                failed.insert(c.id);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all {} acceptance criteria passed", criteria.len());
}
