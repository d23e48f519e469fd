//! Command-line front end.
//!
//! Every subcommand is a thin adapter over a library call. Reports go to the
//! output stream as pretty JSON (stable key order), CSV or plain text;
//! diagnostics go to the error stream. Exit codes: 0 success or `PASS`,
//! 1 `FAIL`, `NOT_APPLICABLE`, a closed-form mismatch or an unsuccessful
//! search, 2 usage or validation errors, 3 resource-cap errors.
//!
//! The enumeration cap can be overridden with `HILBFAM_ENUM_CAP`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::balancing::{
    check_lower_bound, min_balancing_size, min_balancing_size_in, witness_poly, BalancingInstance,
};
use crate::error::Error;
use crate::hilbert::{hilbert_series, modq_value, wilson_value, HilbertReport, IdealTruncation};
use crate::poly::Point;
use crate::setfam::{
    is_prime, make_modq_family, make_uniform_family, set_enumeration_cap, Params, SetFamily,
};
use crate::theorems::{
    verify_grid_remark, verify_hlemma, verify_hrubes, verify_ideal_truncation_equality,
    verify_main2_with, GridInstance, Status, VerificationReport,
};

/// Environment variable overriding the enumeration cap.
pub const ENUM_CAP_ENV: &str = "HILBFAM_ENUM_CAP";

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hilbfam",
    version,
    about = "Hilbert functions of set families over prime fields"
)]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Omit wall-clock timing from verification reports
    #[arg(long, global = true)]
    no_timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct PointSource {
    /// Ground-set size
    #[arg(long)]
    n: Option<usize>,
    /// Set size of the uniform family (or residue for --modq)
    #[arg(long)]
    d: Option<usize>,
    /// Field characteristic
    #[arg(long)]
    p: u32,
    /// Use {K : |K| = d mod Q} and compare against its closed form
    #[arg(long, value_name = "Q")]
    modq: Option<u32>,
    /// Read the family from a file instead
    #[arg(long)]
    family: Option<PathBuf>,
    /// Per-variable exponent cap (1 or p-1)
    #[arg(long, default_value_t = 1)]
    cap: u32,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hilbert value h(m) of a family, with its closed form
    Hilbert {
        #[command(flatten)]
        src: PointSource,
        #[arg(long)]
        m: usize,
    },
    /// Hilbert values h(0), h(1), ... until stabilization
    Series {
        #[command(flatten)]
        src: PointSource,
    },
    /// Basis of the degree-<= m vanishing polynomials
    Ideal {
        #[command(flatten)]
        src: PointSource,
        #[arg(long)]
        m: usize,
    },
    /// Run one of the verification drivers
    Verify {
        #[command(subcommand)]
        claim: VerifyCmd,
    },
    /// L-balancing family checks
    Balance {
        #[command(subcommand)]
        action: BalanceCmd,
    },
    /// Smallest L-balancing family up to a size limit
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long = "L", value_delimiter = ',', required = true)]
        levels: Vec<u32>,
        #[arg(long, default_value_t = 3)]
        limit: usize,
        /// Restrict members to the sets in this family file
        #[arg(long)]
        pool: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum VerifyCmd {
    /// Nested families C([n], d) ⊆ F(d, q): equal h(m) forces equal ideals
    Main {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        p: u32,
        #[arg(long)]
        m: usize,
    },
    /// Degree <= q-1 vanishing on C([n], d) implies vanishing on F(d, q)
    Main2 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        p: u32,
        /// Run even when q-1 <= d <= n-q+1 fails; outcome is reported empirically
        #[arg(long)]
        outside_range: bool,
    },
    /// Vanishing on C([2p], p) and nonzero at 0 forces degree >= p
    Hrubes {
        #[arg(long)]
        p: u32,
    },
    /// Vanishing on C([4p], 2p) but not on C([4p], 3p) forces degree >= p
    Hlemma {
        #[arg(long)]
        p: u32,
    },
    /// Punctured grid check
    Grid {
        #[arg(long)]
        p: u32,
        /// Coordinate sets, e.g. "0,1;0,1,2"
        #[arg(long)]
        sets: String,
        /// Removed grid point, e.g. "1,2"
        #[arg(long)]
        w: String,
    },
    /// Batch of all drivers for every prime up to --p-max
    All {
        #[arg(long, default_value_t = 3)]
        p_max: u32,
    },
}

#[derive(Debug, Subcommand)]
enum BalanceCmd {
    /// Check the lower bound and its witness polynomial for a family
    Check {
        #[arg(long)]
        n: usize,
        #[arg(long = "L", value_delimiter = ',', required = true)]
        levels: Vec<u32>,
        #[arg(long)]
        family: PathBuf,
        /// Field characteristic, default n/2
        #[arg(long)]
        p: Option<u32>,
    },
    /// Print the expanded witness polynomial
    Witness {
        #[arg(long)]
        n: usize,
        #[arg(long = "L", value_delimiter = ',', required = true)]
        levels: Vec<u32>,
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        p: Option<u32>,
    },
}

/// A failure of the front end, already mapped to an exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Resource(_) => EXIT_RESOURCE,
            Error::Domain(_) | Error::Parse { .. } => EXIT_USAGE,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        msg: msg.into(),
    }
}

struct Output {
    body: String,
    code: i32,
}

/// Parse `args` (including the program name), run, and write the report to
/// `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    if let Ok(v) = std::env::var(ENUM_CAP_ENV) {
        match v.trim().parse::<usize>() {
            Ok(cap) => set_enumeration_cap(cap),
            Err(_) => {
                let _ = writeln!(
                    err,
                    "error: {ENUM_CAP_ENV}={v:?} is not a nonnegative integer"
                );
                return EXIT_USAGE;
            }
        }
    }
    match dispatch(&cli) {
        Ok(o) => {
            let _ = out.write_all(o.body.as_bytes());
            o.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.msg);
            f.code
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Hilbert { src, m } => cmd_hilbert(src, *m, cli.format),
        Command::Series { src } => cmd_series(src, cli.format),
        Command::Ideal { src, m } => cmd_ideal(src, *m, cli.format),
        Command::Verify { claim } => cmd_verify(claim, cli),
        Command::Balance { action } => cmd_balance(action, cli),
        Command::Search {
            n,
            levels,
            limit,
            pool,
        } => {
            let res = match pool {
                Some(path) => {
                    let fam = read_family(path)?;
                    min_balancing_size_in(*n, levels, *limit, fam.sets())?
                }
                None => min_balancing_size(*n, levels, *limit)?,
            };
            let code = if res.limit_hit {
                EXIT_NEGATIVE
            } else {
                EXIT_OK
            };
            Ok(Output {
                body: render(&json!(res), cli.format)?,
                code,
            })
        }
    }
}

fn read_family(path: &PathBuf) -> Result<SetFamily, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(SetFamily::from_text(&text)?)
}

/// Which point set a `PointSource` names, plus what is known about it.
struct Source {
    params_n: usize,
    d: Option<usize>,
    q: Option<u32>,
    points: Vec<Point>,
    from_file: bool,
}

fn resolve(src: &PointSource) -> Result<Source, Failure> {
    if let Some(path) = &src.family {
        let fam = read_family(path)?;
        if src.n.is_some_and(|n| n != fam.n()) {
            return Err(usage(format!(
                "--n disagrees with n={} in {}",
                fam.n(),
                path.display()
            )));
        }
        if fam.is_empty() {
            return Err(usage("family file has no sets"));
        }
        return Ok(Source {
            params_n: fam.n(),
            d: src.d,
            q: src.modq,
            points: fam.points(),
            from_file: true,
        });
    }
    let n = src
        .n
        .ok_or_else(|| usage("--n is required without --family"))?;
    let d = src
        .d
        .ok_or_else(|| usage("--d is required without --family"))?;
    let fam = match src.modq {
        Some(q) => make_modq_family(n, d, q as usize)?,
        None => make_uniform_family(n, d)?,
    };
    Ok(Source {
        params_n: n,
        d: Some(d),
        q: src.modq,
        points: fam.points(),
        from_file: false,
    })
}

fn closed_form(s: &Source, m: usize) -> Result<Option<num_bigint::BigUint>, Failure> {
    if s.from_file {
        return Ok(None);
    }
    let d = s.d.expect("generated families know d");
    Ok(match s.q {
        Some(q) => Some(modq_value(s.params_n, d, q as usize, m)?),
        None => wilson_value(s.params_n, d, m).ok(),
    })
}

fn hilbert_report(src: &PointSource, s: &Source, m: usize) -> Result<HilbertReport, Failure> {
    let params = Params::new(s.params_n, s.d, src.p, s.q, m)?;
    Ok(HilbertReport::compute(
        params,
        &s.points,
        src.cap,
        closed_form(s, m)?,
    )?)
}

fn cmd_hilbert(src: &PointSource, m: usize, format: Format) -> Result<Output, Failure> {
    let s = resolve(src)?;
    let rep = hilbert_report(src, &s, m)?;
    let code = if rep.matches == Some(false) {
        EXIT_NEGATIVE
    } else {
        EXIT_OK
    };
    let body = match format {
        Format::Csv => csv_rows(std::slice::from_ref(&rep)),
        _ => render(&json!(rep), format)?,
    };
    Ok(Output { body, code })
}

fn csv_rows(reps: &[HilbertReport]) -> String {
    let mut out = String::from("m,h_oracle,h_closed_form,match\n");
    for r in reps {
        let cf = r.h_closed_form.map(|v| v.to_string()).unwrap_or_default();
        let mt = r.matches.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{cf},{mt}\n", r.params.m, r.h_oracle));
    }
    out
}

fn cmd_series(src: &PointSource, format: Format) -> Result<Output, Failure> {
    let s = resolve(src)?;
    let values = hilbert_series(&s.points, src.p, src.cap)?;
    let reps = (0..values.len())
        .map(|m| hilbert_report(src, &s, m))
        .collect::<Result<Vec<_>, _>>()?;
    debug_assert!(reps.iter().zip(&values).all(|(r, &h)| r.h_oracle == h));
    let code = if reps.iter().any(|r| r.matches == Some(false)) {
        EXIT_NEGATIVE
    } else {
        EXIT_OK
    };
    let body = match format {
        Format::Csv => csv_rows(&reps),
        _ => {
            let rows: Vec<Value> = reps
                .iter()
                .map(|r| {
                    json!({"m": r.params.m, "h_oracle": r.h_oracle,
                                "h_closed_form": r.h_closed_form, "match": r.matches})
                })
                .collect();
            let v = json!({"n": s.params_n, "d": s.d, "p": src.p, "q": s.q, "cap": src.cap,
                           "series": values, "rows": rows});
            render(&v, format)?
        }
    };
    Ok(Output { body, code })
}

fn cmd_ideal(src: &PointSource, m: usize, format: Format) -> Result<Output, Failure> {
    let s = resolve(src)?;
    Params::new(s.params_n, s.d, src.p, s.q, m)?;
    let t = IdealTruncation::compute(&s.points, m, src.p, src.cap)?;
    let basis: Vec<String> = t.polynomials().iter().map(ToString::to_string).collect();
    let v = json!({"n": s.params_n, "d": s.d, "p": src.p, "q": s.q, "m": m, "cap": src.cap,
                   "h": t.h, "monomials": t.monomial_count(), "dimension": t.dim(),
                   "basis": basis});
    Ok(Output {
        body: render(&v, format)?,
        code: EXIT_OK,
    })
}

fn parse_list(s: &str, what: &str) -> Result<Vec<u32>, Failure> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| usage(format!("bad {what} entry {t:?}")))
        })
        .collect()
}

fn report_value(rep: &VerificationReport, no_timing: bool) -> Value {
    if no_timing {
        rep.comparison_value()
    } else {
        json!(rep)
    }
}

fn status_code(status: Status) -> i32 {
    match status {
        Status::Pass => EXIT_OK,
        Status::Fail | Status::NotApplicable => EXIT_NEGATIVE,
    }
}

fn single(rep: VerificationReport, cli: &Cli) -> Result<Output, Failure> {
    Ok(Output {
        body: render(&report_value(&rep, cli.no_timing), cli.format)?,
        code: status_code(rep.status),
    })
}

fn cmd_verify(claim: &VerifyCmd, cli: &Cli) -> Result<Output, Failure> {
    let rep = match claim {
        VerifyCmd::Main { n, d, q, p, m } => {
            Params::new(*n, Some(*d), *p, Some(*q), *m)?;
            let f = make_uniform_family(*n, *d)?.points();
            let g = make_modq_family(*n, *d, *q as usize)?.points();
            verify_ideal_truncation_equality(&f, &g, *m, *p, 1)?
        }
        VerifyCmd::Main2 {
            n,
            d,
            q,
            p,
            outside_range,
        } => verify_main2_with(*n, *d, *q, *p, *outside_range)?,
        VerifyCmd::Hrubes { p } => verify_hrubes(*p)?,
        VerifyCmd::Hlemma { p } => verify_hlemma(*p)?,
        VerifyCmd::Grid { p, sets, w } => {
            let sets = sets
                .split(';')
                .map(|t| parse_list(t, "set"))
                .collect::<Result<Vec<_>, _>>()?;
            let w = Point::new(parse_list(w, "w")?);
            verify_grid_remark(&GridInstance::new(*p, sets, w)?)?
        }
        VerifyCmd::All { p_max } => return verify_all(*p_max, cli),
    };
    single(rep, cli)
}

/// One entry of the `verify all` batch.
#[derive(Debug, Clone)]
enum Job {
    Hrubes(u32),
    Hlemma(u32),
    Main2 { n: usize, d: usize, q: u32, p: u32 },
    Main { n: usize, d: usize, q: u32, p: u32 },
    Grid(GridInstance),
    Balance { p: u32, levels: Vec<u32> },
}

fn grids(p: u32, n: usize) -> Vec<GridInstance> {
    // every subset of F_p with at least two elements, per coordinate
    let choices: Vec<Vec<u32>> = (0u32..1 << p)
        .filter(|m| m.count_ones() >= 2)
        .map(|m| (0..p).filter(|i| m >> i & 1 == 1).collect())
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let sets: Vec<Vec<u32>> = idx.iter().map(|&i| choices[i].clone()).collect();
        let probe = GridInstance::new(
            p,
            sets.clone(),
            Point::new(sets.iter().map(|t| t[0]).collect()),
        )
        .expect("grid sets are valid");
        for w in probe.points().expect("small grid") {
            out.push(GridInstance::new(p, sets.clone(), w).expect("w is a grid point"));
        }
        let Some(k) = (0..n).rev().find(|&k| idx[k] + 1 < choices.len()) else {
            return out;
        };
        idx[k] += 1;
        idx[k + 1..].iter_mut().for_each(|i| *i = 0);
    }
}

fn batch_jobs(p_max: u32) -> Vec<Job> {
    let mut jobs = Vec::new();
    for p in (2..=p_max).filter(|&p| is_prime(p as u64)) {
        jobs.push(Job::Hrubes(p));
        if p <= 3 {
            jobs.push(Job::Hlemma(p));
        }
        let mut qs = vec![p];
        if p * p <= 4 {
            qs.push(p * p);
        }
        for q in qs {
            for n in 1..=8usize {
                let qm1 = q as usize - 1;
                for d in qm1..=n.saturating_sub(qm1) {
                    if d + qm1 <= n {
                        jobs.push(Job::Main2 { n, d, q, p });
                        jobs.push(Job::Main { n, d, q, p });
                    }
                }
            }
        }
        for n in 1..=2 {
            jobs.extend(grids(p, n).into_iter().map(Job::Grid));
        }
        if p <= 3 {
            for mask in 1u32..1 << (p - 1) {
                let levels: Vec<u32> = (1..p).filter(|l| mask >> (l - 1) & 1 == 1).collect();
                jobs.push(Job::Balance { p, levels });
            }
        }
    }
    jobs
}

fn run_job(job: &Job) -> crate::error::Result<VerificationReport> {
    match job {
        Job::Hrubes(p) => verify_hrubes(*p),
        Job::Hlemma(p) => verify_hlemma(*p),
        Job::Main2 { n, d, q, p } => verify_main2_with(*n, *d, *q, *p, false),
        Job::Main { n, d, q, p } => {
            let f = make_uniform_family(*n, *d)?.points();
            let g = make_modq_family(*n, *d, *q as usize)?.points();
            verify_ideal_truncation_equality(&f, &g, *q as usize - 1, *p, 1)
        }
        Job::Grid(g) => verify_grid_remark(g),
        Job::Balance { p, levels } => {
            let n = 2 * *p as usize;
            let res = min_balancing_size(n, levels, 3)?;
            let family = match res.witness_family {
                Some(f) => f,
                None => SetFamily::empty(n)?,
            };
            check_lower_bound(&BalancingInstance::new(n, levels, family)?, *p)
        }
    }
}

fn verify_all(p_max: u32, cli: &Cli) -> Result<Output, Failure> {
    if p_max < 2 {
        return Err(usage("--p-max must be at least 2"));
    }
    let jobs = batch_jobs(p_max);
    // rayon's indexed collect keeps job order
    let reports = jobs
        .par_iter()
        .map(run_job)
        .collect::<crate::error::Result<Vec<_>>>()?;
    let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
    let summary = json!({
        "total": reports.len(),
        "pass": count(Status::Pass),
        "fail": count(Status::Fail),
        "not_applicable": count(Status::NotApplicable),
    });
    let code = if reports.iter().all(|r| r.status == Status::Pass) {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    };
    let v = json!({
        "p_max": p_max,
        "summary": summary,
        "reports": reports.iter().map(|r| report_value(r, cli.no_timing)).collect::<Vec<_>>(),
    });
    Ok(Output {
        body: render(&v, cli.format)?,
        code,
    })
}

fn cmd_balance(action: &BalanceCmd, cli: &Cli) -> Result<Output, Failure> {
    let (n, levels, family, p) = match action {
        BalanceCmd::Check {
            n,
            levels,
            family,
            p,
        }
        | BalanceCmd::Witness {
            n,
            levels,
            family,
            p,
        } => (*n, levels, family, *p),
    };
    let fam = read_family(family)?;
    let inst = BalancingInstance::new(n, levels, fam)?;
    let p = p.unwrap_or((n / 2) as u32);
    match action {
        BalanceCmd::Check { .. } => single(check_lower_bound(&inst, p)?, cli),
        BalanceCmd::Witness { .. } => {
            let poly = witness_poly(&inst, p)?;
            let v = json!({"n": n, "p": p, "L": inst.levels(), "family": inst.family(),
                           "degree": poly.degree(), "polynomial": poly});
            Ok(Output {
                body: render(&v, cli.format)?,
                code: EXIT_OK,
            })
        }
    }
}

fn render(v: &impl Serialize, format: Format) -> Result<String, Failure> {
    let v = serde_json::to_value(v).map_err(|e| usage(e.to_string()))?;
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&v).map_err(|e| usage(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Text => Ok(text_lines(&v)),
        Format::Csv => Err(usage(
            "csv output is only available for `hilbert` and `series`",
        )),
    }
}

fn text_lines(v: &Value) -> String {
    let mut out = String::new();
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                match val {
                    Value::Array(items)
                        if items.iter().all(Value::is_object) && !items.is_empty() =>
                    {
                        out.push_str(&format!("{k}:\n"));
                        for item in items {
                            out.push_str(&format!("  - {item}\n"));
                        }
                    }
                    Value::String(s) => out.push_str(&format!("{k}: {s}\n")),
                    other => out.push_str(&format!("{k}: {other}\n")),
                }
            }
        }
        other => out.push_str(&format!("{other}\n")),
    }
    out
}
