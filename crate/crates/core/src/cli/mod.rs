//! `finsler` command-line front end.
//!
//! Exit codes: 0 success or passing verdict, 1 failing verdict, 2 bad input,
//! 3 numerical failure (domain, singularity, sample exhaustion).

pub mod document;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::calculus::{grad_y, MetricFunction, Quantity};
use crate::error::{Error, Result};
use crate::flatness::{run_check, CheckKind, FlatnessReport, DEFAULT_TOL};
use crate::kropina::{kropina_point, AuxScalars};
use crate::mth_root::{metric_point, oracle_fundamental_tensor, Warning};
use crate::report::DiscrepancyReport;
use crate::sampling::{Rejection, SampleBox, DEFAULT_SEED};
use crate::spray::{integrate_geodesic, GeodesicPath, Metric, PathStatus};
use crate::verify::{verify_sampled, VerifyReport};
use document::{parse_spec, MetricSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const SEED_ENV: &str = "FINSLER_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "finsler",
    version,
    about = "m-th root Finsler metrics and their Kropina change"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the metric quantities at one point.
    Eval(EvalArgs),
    /// Adjudicate every closed form against the oracle on sampled points.
    Verify(SampleArgs),
    /// Sampled flatness / relatedness verdict.
    Check(CheckArgs),
    /// Integrate a geodesic with RK4 and write the path file.
    Geodesic(GeodesicArgs),
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_parser = parse_csv)]
    x: Csv,
    #[arg(long, value_parser = parse_csv)]
    y: Csv,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Defaults to $FINSLER_SEED, then a fixed seed.
    #[arg(long)]
    seed: Option<u64>,
    /// x sampling interval, applied to every coordinate.
    #[arg(long = "box", value_parser = parse_pair, default_value = "-1,1", allow_hyphen_values = true)]
    x_box: Pair,
    /// y sampling interval, applied to every coordinate.
    #[arg(long = "ybox", value_parser = parse_pair, default_value = "0.1,2", allow_hyphen_values = true)]
    y_box: Pair,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CheckArg {
    DuallyFlat,
    ProjFlat,
    ProjRelated,
}

#[derive(Debug, Args)]
struct CheckArgs {
    kind: CheckArg,
    #[command(flatten)]
    sampling: SampleArgs,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Base,
    Kropina,
}

#[derive(Debug, Args)]
struct GeodesicArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value = "base")]
    metric: MetricArg,
    #[arg(long, value_parser = parse_csv, allow_hyphen_values = true)]
    x0: Csv,
    #[arg(long, value_parser = parse_csv, allow_hyphen_values = true)]
    y0: Csv,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone)]
struct Csv(Vec<f64>);

#[derive(Debug, Clone, Copy)]
struct Pair(f64, f64);

fn parse_csv(s: &str) -> std::result::Result<Csv, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .and_then(|v| {
            if v.iter().all(|c| c.is_finite()) {
                Ok(Csv(v))
            } else {
                Err("values must be finite".into())
            }
        })
}

fn parse_pair(s: &str) -> std::result::Result<Pair, String> {
    match *parse_csv(s)?.0.as_slice() {
        [lo, hi] if lo <= hi => Ok(Pair(lo, hi)),
        [_, _] => Err("expected LO <= HI".into()),
        _ => Err("expected LO,HI".into()),
    }
}

/// Common envelope for every report.
#[derive(Debug, Serialize)]
struct RunReport<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a [String],
    spec_sha256: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    result: &'a T,
}

#[derive(Debug, Serialize)]
struct EvalKropina {
    beta: f64,
    fbar: f64,
    lbar: Vec<f64>,
    gbar: Vec<Vec<f64>>,
    aux: AuxScalars,
}

#[derive(Debug, Serialize)]
struct EvalOutput {
    x: Vec<f64>,
    y: Vec<f64>,
    m: usize,
    warnings: Vec<Warning>,
    a: f64,
    f: f64,
    l: Vec<f64>,
    g: Vec<Vec<f64>>,
    kropina: Option<EvalKropina>,
}

#[derive(Debug, Serialize)]
struct GeodesicSummary {
    metric: crate::spray::MetricKind,
    out: String,
    step: f64,
    samples: usize,
    status: PathStatus,
    end_t: f64,
    end_x: Vec<f64>,
    end_v: Vec<f64>,
}

struct Loaded {
    spec: MetricSpec,
    hash: String,
}

fn load(path: &PathBuf) -> Result<Loaded> {
    let bytes = fs::read(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let spec = parse_spec(text)?;
    let hash = Sha256::digest(&bytes)
        .iter()
        .fold(String::new(), |mut s, b| {
            write!(s, "{b:02x}").unwrap();
            s
        });
    Ok(Loaded { spec, hash })
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|c| format!("{c:.12e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |c| format!("{c:.3e}"))
}

/// Runs the CLI with the process environment; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(args, std::env::var(SEED_ENV).ok(), out, err)
}

/// As [`run`], with `FINSLER_SEED` supplied explicitly.
pub fn run_with_env<I, T>(
    args: I,
    env_seed: Option<String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return if code == 0 { EXIT_OK } else { EXIT_INPUT };
        }
    };
    let echo: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match dispatch(cli.command, &echo, env_seed, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn resolve_seed(flag: Option<u64>, env: Option<String>) -> Result<u64> {
    match (flag, env) {
        (Some(s), _) => Ok(s),
        (None, Some(v)) => v
            .trim()
            .parse()
            .map_err(|_| Error::Validation(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        (None, None) => Ok(DEFAULT_SEED),
    }
}

fn emit<T: Serialize>(
    out: &mut dyn Write,
    json: bool,
    echo: &[String],
    hash: &str,
    seed: Option<u64>,
    result: &T,
    text: impl FnOnce() -> String,
) -> Result<()> {
    let body = if json {
        let report = RunReport {
            tool: "finsler",
            version: env!("CARGO_PKG_VERSION"),
            command: echo,
            spec_sha256: hash,
            seed,
            result,
        };
        let mut s =
            serde_json::to_string_pretty(&report).map_err(|e| Error::Parse(e.to_string()))?;
        s.push('\n');
        s
    } else {
        let mut s = format!("spec sha256 {hash}\n");
        if let Some(seed) = seed {
            writeln!(s, "seed {seed}").unwrap();
        }
        s + &text()
    };
    out.write_all(body.as_bytes())
        .map_err(|e| Error::Parse(format!("writing output: {e}")))
}

fn dispatch(
    cmd: Command,
    echo: &[String],
    env_seed: Option<String>,
    out: &mut dyn Write,
) -> Result<i32> {
    match cmd {
        Command::Eval(a) => eval(a, echo, out),
        Command::Verify(a) => verify(a, echo, env_seed, out),
        Command::Check(a) => check(a, echo, env_seed, out),
        Command::Geodesic(a) => geodesic(a, echo, out),
    }
}

fn sample_box(a: &SampleArgs) -> SampleBox {
    SampleBox {
        x: (a.x_box.0, a.x_box.1),
        y: (a.y_box.0, a.y_box.1),
    }
}

fn eval(a: EvalArgs, echo: &[String], out: &mut dyn Write) -> Result<i32> {
    let Loaded { spec, hash } = load(&a.spec)?;
    let (field, x, y) = (&spec.field, &a.x.0, &a.y.0);
    let p = metric_point(field, x, y)?;
    let l = grad_y(&MetricFunction::base(field, Quantity::F), x, y)?;
    let g = oracle_fundamental_tensor(field, x, y)?;
    let kropina = match &spec.one_form {
        None => None,
        Some(b) => {
            let kp = kropina_point(field, b, x, y)?;
            let lbar = grad_y(&MetricFunction::kropina(field, b, Quantity::Fbar), x, y)?;
            Some(EvalKropina {
                beta: kp.beta,
                fbar: kp.fbar,
                lbar: lbar.iter().copied().collect(),
                gbar: rows(&kp.gbar_oracle),
                aux: kp.aux,
            })
        }
    };
    let result = EvalOutput {
        x: x.clone(),
        y: y.clone(),
        m: p.m,
        warnings: p.warnings.clone(),
        a: p.a,
        f: p.f,
        l: l.iter().copied().collect(),
        g: rows(&g),
        kropina,
    };
    emit(out, a.json, echo, &hash, None, &result, || {
        let mut s = String::new();
        for w in &result.warnings {
            writeln!(s, "warning: {}", w.message()).unwrap();
        }
        writeln!(s, "A      {:.15e}", result.a).unwrap();
        writeln!(s, "F      {:.15e}", result.f).unwrap();
        writeln!(s, "l      {}", fmt_vec(&result.l)).unwrap();
        for (i, r) in result.g.iter().enumerate() {
            writeln!(s, "g[{}]   {}", i + 1, fmt_vec(r)).unwrap();
        }
        if let Some(k) = &result.kropina {
            writeln!(s, "beta   {:.15e}", k.beta).unwrap();
            writeln!(s, "Fbar   {:.15e}", k.fbar).unwrap();
            writeln!(s, "lbar   {}", fmt_vec(&k.lbar)).unwrap();
            for (i, r) in k.gbar.iter().enumerate() {
                writeln!(s, "gbar[{}] {}", i + 1, fmt_vec(r)).unwrap();
            }
            let aux = &k.aux;
            for (name, v) in [
                ("tau", Some(aux.tau)),
                ("w", Some(aux.w)),
                ("c2", Some(aux.c2)),
                ("v", Some(aux.v)),
                ("b2", Some(aux.b2)),
                ("delta", aux.delta),
                ("q", aux.q),
                ("d2", aux.d2),
                ("p0", aux.p0),
                ("p1", aux.p1),
                ("p2", aux.p2),
                ("p3", aux.p3),
            ] {
                let v = v.map_or_else(|| "undefined".into(), |c| format!("{c:.15e}"));
                writeln!(s, "{name:<6} {v}").unwrap();
            }
        }
        s
    })?;
    Ok(EXIT_OK)
}

fn write_rejections(s: &mut String, rejected: &[Rejection]) {
    for r in rejected {
        writeln!(
            s,
            "  rejected attempt {} x={} y={}: {}",
            r.attempt,
            fmt_vec(&r.x),
            fmt_vec(&r.y),
            r.reason
        )
        .unwrap();
    }
}

fn discrepancy_table(s: &mut String, d: &DiscrepancyReport) {
    writeln!(
        s,
        "{:<24} {:>5} {:>5} {:>10} {:>10} {:>8} {:>6}  point of max",
        "formula", "eval", "undef", "max_abs", "max_rel", "bound", "status"
    )
    .unwrap();
    for r in &d.rows {
        let status = match r.pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "report",
        };
        let at = r.point_of_max.as_ref().map_or_else(String::new, |p| {
            format!("#{} x={} y={}", p.index, fmt_vec(&p.x), fmt_vec(&p.y))
        });
        writeln!(
            s,
            "{:<24} {:>5} {:>5} {:>10} {:>10} {:>8} {:>6}  {}",
            r.formula,
            r.evaluated,
            r.undefined,
            fmt_opt(r.max_abs),
            fmt_opt(r.max_rel),
            r.bound.map_or_else(|| "-".into(), |b| format!("{b:.0e}")),
            status,
            at
        )
        .unwrap();
    }
    for n in &d.notes {
        writeln!(s, "note: {n}").unwrap();
    }
}

fn verify(
    a: SampleArgs,
    echo: &[String],
    env_seed: Option<String>,
    out: &mut dyn Write,
) -> Result<i32> {
    let Loaded { spec, hash } = load(&a.spec)?;
    let seed = resolve_seed(a.seed, env_seed)?;
    let b = spec.one_form.as_ref().ok_or_else(|| {
        Error::Validation("verify needs a one_form in the --spec document".into())
    })?;
    let report: VerifyReport = verify_sampled(&spec.field, b, a.samples, seed, &sample_box(&a))?;
    emit(out, a.json, echo, &hash, Some(seed), &report, || {
        let mut s = format!(
            "points {} of {} (attempts {}, rejected {})\n",
            report.accepted,
            report.requested,
            report.attempts,
            report.rejected.len()
        );
        write_rejections(&mut s, &report.rejected);
        discrepancy_table(&mut s, &report.discrepancy);
        s
    })?;
    Ok(if !report.discrepancy.passed() {
        EXIT_FAIL
    } else if report.accepted < report.requested || report.accepted == 0 {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    })
}

fn check(
    a: CheckArgs,
    echo: &[String],
    env_seed: Option<String>,
    out: &mut dyn Write,
) -> Result<i32> {
    let Loaded { spec, hash } = load(&a.sampling.spec)?;
    let seed = resolve_seed(a.sampling.seed, env_seed)?;
    if !(a.tol.is_finite() && a.tol >= 0.0) {
        return Err(Error::Validation(format!(
            "tolerance {} must be finite and non-negative",
            a.tol
        )));
    }
    let kind = match a.kind {
        CheckArg::DuallyFlat => CheckKind::DuallyFlat,
        CheckArg::ProjFlat => CheckKind::ProjectivelyFlat,
        CheckArg::ProjRelated => CheckKind::ProjectivelyRelated,
    };
    let report: FlatnessReport = run_check(
        kind,
        &spec.field,
        spec.one_form.as_ref(),
        a.sampling.samples,
        seed,
        &sample_box(&a.sampling),
        a.tol,
    )?;
    emit(
        out,
        a.sampling.json,
        echo,
        &hash,
        Some(seed),
        &report,
        || {
            let mut s =
                format!("check {} ({:?} metric)\n", kind.label(), report.metric).to_lowercase();
            writeln!(
                s,
                "samples {} of {} (attempts {}, rejected {})",
                report.accepted,
                report.requested,
                report.attempts,
                report.rejected.len()
            )
            .unwrap();
            write_rejections(&mut s, &report.rejected);
            let residual_name = if kind == CheckKind::ProjectivelyRelated {
                "max wedge residual"
            } else {
                "max residual"
            };
            write!(s, "{residual_name} {}", fmt_opt(report.max_residual)).unwrap();
            if let Some(p) = &report.point_of_max {
                write!(
                    s,
                    " at #{} x={} y={}",
                    p.index,
                    fmt_vec(&p.x),
                    fmt_vec(&p.y)
                )
                .unwrap();
            }
            s.push('\n');
            if kind != CheckKind::ProjectivelyRelated {
                writeln!(s, "max raw residual {}", fmt_opt(report.max_raw)).unwrap();
            }
            writeln!(
                s,
                "max closed-form residual {}",
                fmt_opt(report.max_closed_residual)
            )
            .unwrap();
            if report.max_closed_residual_alt.is_some() {
                writeln!(
                    s,
                    "max closed-form residual (alt) {}",
                    fmt_opt(report.max_closed_residual_alt)
                )
                .unwrap();
            }
            for n in &report.notes {
                writeln!(s, "note: {n}").unwrap();
            }
            writeln!(
                s,
                "verdict {} (tol {:e})",
                report.verdict.label(),
                report.tol
            )
            .unwrap();
            s
        },
    )?;
    Ok(match report.verdict {
        v if v.passed() => EXIT_OK,
        crate::flatness::Verdict::Inconclusive => EXIT_NUMERICAL,
        _ => EXIT_FAIL,
    })
}

fn geodesic(a: GeodesicArgs, echo: &[String], out: &mut dyn Write) -> Result<i32> {
    let Loaded { spec, hash } = load(&a.spec)?;
    let metric = match (a.metric, &spec.one_form) {
        (MetricArg::Base, _) => Metric::base(&spec.field),
        (MetricArg::Kropina, Some(b)) => Metric::kropina(&spec.field, b),
        (MetricArg::Kropina, None) => {
            return Err(Error::Validation(
                "--metric kropina needs a one_form in the --spec document".into(),
            ))
        }
    };
    let path: GeodesicPath = integrate_geodesic(&metric, &a.x0.0, &a.y0.0, a.t, a.steps)?;
    let mut buf = Vec::new();
    path.write_text(&mut buf)
        .and_then(|_| fs::write(&a.out, &buf))
        .map_err(|e| Error::Parse(format!("{}: {e}", a.out.display())))?;
    let end = path.endpoint();
    let summary = GeodesicSummary {
        metric: path.metric,
        out: a.out.display().to_string(),
        step: path.step,
        samples: path.samples.len(),
        status: path.status.clone(),
        end_t: end.t,
        end_x: end.x.clone(),
        end_v: end.v.clone(),
    };
    emit(out, a.json, echo, &hash, None, &summary, || {
        let mut s = format!("wrote {} samples to {}\n", summary.samples, summary.out);
        match &summary.status {
            PathStatus::Complete => s.push_str("status complete\n"),
            PathStatus::Truncated { step, reason } => {
                writeln!(s, "status truncated at step {step}: {reason}").unwrap()
            }
        }
        writeln!(s, "t  {:.15e}", summary.end_t).unwrap();
        writeln!(s, "x  {}", fmt_vec(&summary.end_x)).unwrap();
        writeln!(s, "v  {}", fmt_vec(&summary.end_v)).unwrap();
        s
    })?;
    Ok(if path.is_complete() {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    })
}
