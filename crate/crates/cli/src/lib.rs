//! `hhi`: exact orbifold Gromov-Witten invariants from the command line.

pub mod cache;
pub mod check;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hhi_core::euler::{euler_class_compact, euler_class_mainthm, euler_class_via_walls, weighted_class};
use hhi_core::exactnum::{LaurentPoly, Rational};
use hhi_core::invariants::{invariant_direct, invariant_weighted, InvariantKey, Method};
use hhi_core::recursion::{c3z3_direct, c3z3_mirror, c3z3_series, comb_recursion};
use hhi_core::OrbifoldData;
use serde::Serialize;

use crate::cache::Cache;
use crate::check::{run_checks, CheckParams};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_MISMATCH: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "hhi", version, about = "Exact genus-zero invariants of [C^N / mu_r]")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute one invariant.
    Invariant(InvariantArgs),
    /// Coefficients I_0..I_L of the [C^3/mu_3] series.
    Series(SeriesArgs),
    /// Dump the Euler class as JSON.
    Euler(EulerArgs),
    /// Coefficients of the weighted projective space class, as JSON.
    Weighted(DataArgs),
    /// Randomized property suites.
    Check(CheckArgs),
    /// Summarize the invariant cache.
    CacheInfo(CacheArgs),
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Group order.
    #[arg(long)]
    r: u32,
    /// Weights of the action, as exponents of omega.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    weights: Vec<i64>,
    /// Group elements at the markings, as exponents of omega.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    elements: Vec<i64>,
}

impl DataArgs {
    fn data(&self) -> Result<OrbifoldData> {
        if self.elements.len() < 3 {
            bail!("need at least 3 elements, got {}", self.elements.len());
        }
        Ok(OrbifoldData::new(self.r, &self.weights, &self.elements)?)
    }
}

#[derive(Args, Debug)]
struct CacheArgs {
    /// Cache file (overrides HHI_CACHE).
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Direct,
    Comb,
    Weighted,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct InvariantArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Descendant exponents, one per marking.
    #[arg(long, value_delimiter = ',')]
    psi: Option<Vec<u32>>,
    #[arg(long, value_enum, default_value = "direct")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Drop the 1/r gerbe factor.
    #[arg(long)]
    coarse: bool,
    #[command(flatten)]
    cache: CacheArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SeriesMethod {
    Series,
    Direct,
    Both,
}

#[derive(Args, Debug)]
struct SeriesArgs {
    #[arg(long)]
    lmax: usize,
    #[arg(long, value_enum, default_value = "series")]
    method: SeriesMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Form {
    Compact,
    Mainthm,
    Walls,
}

#[derive(Args, Debug)]
struct EulerArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "compact")]
    form: Form,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, default_value_t = 6)]
    n_max: usize,
    #[arg(long, default_value_t = 4)]
    r_max: u32,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    match cli.command {
        Command::Invariant(a) => cmd_invariant(a, out, err),
        Command::Series(a) => cmd_series(a, out),
        Command::Euler(a) => cmd_euler(a, out),
        Command::Weighted(a) => cmd_weighted(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::CacheInfo(a) => cmd_cache_info(a, out),
    }
}

#[derive(Serialize)]
struct MethodValue {
    method: Method,
    value: String,
}

#[derive(Serialize)]
struct InvariantOutput {
    r: u32,
    weights: Vec<u32>,
    elements: Vec<u32>,
    psi: Vec<u32>,
    normalization: &'static str,
    results: Vec<MethodValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

fn compute(method: Method, key: &InvariantKey) -> Result<LaurentPoly> {
    Ok(match method {
        Method::Direct => invariant_direct(key)?,
        Method::Comb => comb_recursion(key)?,
        Method::Weighted => invariant_weighted(key)?,
        Method::Series => unreachable!("series is not a per-key method"),
    })
}

fn cmd_invariant(a: InvariantArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    let data = a.data.data()?;
    let n = data.n();
    let psi = a.psi.clone().unwrap_or_else(|| vec![0; n]);
    if psi.len() != n {
        bail!("--psi has {} entries for {n} markings", psi.len());
    }
    let key = InvariantKey::new(data.clone(), psi)?;
    let methods = match a.method {
        MethodArg::Direct => vec![Method::Direct],
        MethodArg::Comb => vec![Method::Comb],
        MethodArg::Weighted => vec![Method::Weighted],
        MethodArg::All => vec![Method::Direct, Method::Comb],
    };
    let scale = if a.coarse { Rational::from_int(data.r() as i64) } else { Rational::one() };

    let mut note = None;
    let mut values = Vec::new();
    if !data.admissible() {
        note = Some("elements are not admissible (their product is not the identity); the invariant is 0".to_string());
        values = methods.iter().map(|&m| (m, LaurentPoly::zero(data.dim()))).collect();
    } else {
        let mut cache = Cache::load(cache::resolve_path(a.cache.cache.as_deref()))?;
        for &m in &methods {
            let v = cache.get_or_compute(&key, m, || compute(m, &key).with_context(|| format!("{m} pipeline")))?;
            values.push((m, v));
        }
        if let Err(e) = cache.save() {
            writeln!(err, "warning: cache not written: {e:#}")?;
        }
    }
    let values: Vec<(Method, LaurentPoly)> = values.into_iter().map(|(m, v)| (m, v.scale(&scale))).collect();
    let verdict = (values.len() > 1).then(|| {
        if values.windows(2).all(|w| w[0].1 == w[1].1) {
            "MATCH"
        } else {
            "MISMATCH"
        }
    });

    match a.format {
        Format::Text => {
            if let [(_, v)] = values.as_slice() {
                writeln!(out, "{v}")?;
            } else {
                for (m, v) in &values {
                    writeln!(out, "{m}: {v}")?;
                }
            }
            if let Some(v) = verdict {
                writeln!(out, "{v}")?;
            }
            if let Some(note) = &note {
                writeln!(err, "note: {note}")?;
            }
        }
        Format::Json => {
            let o = InvariantOutput {
                r: data.r(),
                weights: data.weights().to_vec(),
                elements: data.elements().to_vec(),
                psi: key.psi().to_vec(),
                normalization: if a.coarse { "coarse" } else { "stack" },
                results: values.iter().map(|(m, v)| MethodValue { method: *m, value: v.to_string() }).collect(),
                verdict,
                note,
            };
            writeln!(out, "{}", serde_json::to_string(&o)?)?;
        }
    }
    Ok(if verdict == Some("MISMATCH") { EXIT_MISMATCH } else { EXIT_OK })
}

#[derive(Serialize)]
struct SeriesRow {
    l: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    series: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    direct: Option<String>,
}

fn cmd_series(a: SeriesArgs, out: &mut dyn Write) -> Result<u8> {
    let direct = || -> Result<Vec<Rational>> { Ok((0..=a.lmax).map(c3z3_direct).collect::<hhi_core::Result<_>>()?) };
    let mut code = EXIT_OK;
    let rows: Vec<SeriesRow> = match a.method {
        SeriesMethod::Series => c3z3_series(a.lmax)?
            .into_iter()
            .enumerate()
            .map(|(l, v)| SeriesRow { l, value: Some(v.to_string()), series: None, direct: None })
            .collect(),
        SeriesMethod::Direct => direct()?
            .into_iter()
            .enumerate()
            .map(|(l, v)| SeriesRow { l, value: Some(v.to_string()), series: None, direct: None })
            .collect(),
        SeriesMethod::Both => {
            let s = c3z3_series(a.lmax)?;
            let d = direct()?;
            if s != d || c3z3_mirror(a.lmax)? != s {
                code = EXIT_MISMATCH;
            }
            s.iter()
                .zip(&d)
                .enumerate()
                .map(|(l, (s, d))| SeriesRow { l, value: None, series: Some(s.to_string()), direct: Some(d.to_string()) })
                .collect()
        }
    };
    writeln!(out, "{}", serde_json::to_string(&rows)?)?;
    Ok(code)
}

fn cmd_euler(a: EulerArgs, out: &mut dyn Write) -> Result<u8> {
    let data = a.data.data()?;
    let e = match a.form {
        Form::Compact => euler_class_compact(&data)?,
        Form::Mainthm => euler_class_mainthm(&data)?,
        Form::Walls => euler_class_via_walls(&data)?,
    };
    writeln!(out, "{}", e.to_json())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct WeightedOutput {
    n: usize,
    /// Coefficient of `H^k`, `k = 0..=n-3`.
    coeffs: Vec<String>,
}

fn cmd_weighted(a: DataArgs, out: &mut dyn Write) -> Result<u8> {
    let data = a.data()?;
    let w = weighted_class(&data)?;
    let o = WeightedOutput { n: w.n(), coeffs: w.coeffs().iter().map(|c| c.to_string()).collect() };
    writeln!(out, "{}", serde_json::to_string(&o)?)?;
    Ok(EXIT_OK)
}

fn cmd_check(a: CheckArgs, out: &mut dyn Write) -> Result<u8> {
    if a.n_max < 3 || a.r_max < 1 {
        bail!("--n-max must be at least 3 and --r-max at least 1");
    }
    let reports = run_checks(&CheckParams { n_max: a.n_max, r_max: a.r_max, trials: a.trials, seed: a.seed });
    match a.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(&reports)?)?,
        Format::Text => {
            for r in &reports {
                let tag = if r.failed == 0 { "ok" } else { "FAILED" };
                write!(out, "{}: {}/{} {tag}", r.suite, r.passed, r.passed + r.failed)?;
                if let Some(note) = &r.note {
                    write!(out, " ({note})")?;
                }
                writeln!(out)?;
                for f in &r.failures {
                    writeln!(out, "  {f}")?;
                }
            }
        }
    }
    Ok(if reports.iter().all(|r| r.failed == 0) { EXIT_OK } else { EXIT_MISMATCH })
}

fn cmd_cache_info(a: CacheArgs, out: &mut dyn Write) -> Result<u8> {
    let cache = Cache::load(cache::resolve_path(a.cache.as_deref()))?;
    writeln!(out, "path: {}", cache.path().display())?;
    writeln!(out, "format: {}", cache::FORMAT)?;
    writeln!(out, "records: {}", cache.len())?;
    for m in [Method::Direct, Method::Comb, Method::Weighted] {
        writeln!(out, "  {m}: {}", cache.count(m))?;
    }
    Ok(EXIT_OK)
}
