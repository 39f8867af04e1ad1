//! `weakclone` command line: single runs, γ sweeps, chains and qudits.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical precondition
//! violated (bandwidth, leakage, vanishing overlap, representation limits).

mod parse;
mod settings;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use weakclone::fit::fit_convergence_slope;
use weakclone::protocols::{
    random_hermitian, random_state, run_chain, run_qudit, run_teleportation_sequential,
    run_weak_cloning, ChainConfig, Layout, PointerReport, ProtocolConfig, RepresentationChoice,
    RunReport, Scheme, DEFAULT_GAMMA,
};
use weakclone::Error;

use crate::parse::{parse_observable, parse_state};
use crate::settings::Settings;

/// Exact CSV header of `sweep`.
pub const SWEEP_HEADER: &str = "gamma,est_a,exact_a,err_a,est_b,exact_b,err_b,ps_prob,representation";

#[derive(Parser, Debug)]
#[command(name = "weakclone", version, about = "Weak measurements on teleported and weakly cloned states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One protocol run, printed as a JSON object
    Run(Settings),
    /// Runs over a list of strengths, CSV rows plus fitted slopes
    Sweep(Settings),
    /// k parties linked by entangled pairs, one JSON line per party
    Chain(Settings),
    /// Weak cloning of an N-level system
    Qudit(Settings),
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Core(e) if e.is_numerical() => write!(f, "numerical error: {e}"),
            CliError::Core(e) => write!(f, "configuration error: {e}"),
        }
    }
}

fn warn(msg: String) {
    eprintln!("warning: {msg}");
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Jsonl,
}

fn format_of(s: &Settings, default: Format) -> Result<Format, CliError> {
    match s.format.as_deref() {
        None => Ok(default),
        Some("csv") => Ok(Format::Csv),
        Some("jsonl") => Ok(Format::Jsonl),
        Some(other) => Err(CliError::Config(format!("unknown format `{other}`; use csv or jsonl"))),
    }
}

fn parsed<T: std::str::FromStr<Err = Error>>(value: &Option<String>, default: T) -> Result<T, CliError> {
    match value {
        Some(text) => text.parse().map_err(|e: Error| CliError::Config(e.to_string())),
        None => Ok(default),
    }
}

/// Builds a protocol configuration. Without `--state` the state is drawn
/// from the seed; missing observables are random Hermitian matrices drawn
/// from the seed as well.
fn protocol_config(s: &Settings, allow_gamma_list: bool) -> Result<ProtocolConfig, CliError> {
    let seed = s.seed.unwrap_or(0);
    let phi = match &s.state {
        Some(text) => parse_state(text, warn)?,
        None => random_state(s.dim.unwrap_or(2), seed)?,
    };
    let n = phi.dims()[0];
    if let Some(d) = s.dim.filter(|&d| d != n) {
        return Err(CliError::Config(format!("--dim {d} does not match the {n}-level state")));
    }
    let observable = |text: &Option<String>, offset: u64| match text {
        Some(t) => parse_observable(t),
        None => Ok(random_hermitian(n, seed.wrapping_add(offset))?),
    };
    let mut cfg = ProtocolConfig::new(phi, observable(&s.obs_a, 1)?, observable(&s.obs_b, 2)?);

    let gamma = match s.gamma.as_deref() {
        None => None,
        Some(&[g]) => Some(g),
        Some(_) if allow_gamma_list => None,
        Some(list) => {
            return Err(CliError::Config(format!("expected one --gamma value, got {}", list.len())));
        }
    };
    cfg.gamma_a = s.gamma_a.or(gamma).unwrap_or(DEFAULT_GAMMA);
    cfg.gamma_b = s.gamma_b.or(gamma).unwrap_or(DEFAULT_GAMMA);
    if let Some(d) = s.delta {
        cfg.delta_a = d;
        cfg.delta_b = d;
    }
    cfg.representation = parsed(&s.repr, RepresentationChoice::default())?;
    cfg.grid_n = s.grid_n.unwrap_or(cfg.grid_n);
    cfg.grid_half_width = s.grid_l.unwrap_or(cfg.grid_half_width);
    cfg.seed = seed;
    cfg.layout = parsed(&s.layout, Layout::default())?;
    cfg.validate()?;
    cfg.grid()?;
    Ok(cfg)
}

fn run_scheme(scheme: Scheme, cfg: &ProtocolConfig) -> Result<RunReport, CliError> {
    let report = match scheme {
        Scheme::WeakClone => run_weak_cloning(cfg)?,
        Scheme::Sequential => run_teleportation_sequential(cfg)?,
        other => {
            return Err(CliError::Config(format!(
                "scheme `{}` is not available here; use weakclone or sequential",
                other.as_str()
            )))
        }
    };
    warn_weakness(&report.pointers);
    Ok(report)
}

fn warn_weakness(pointers: &[PointerReport]) {
    for p in pointers.iter().filter(|p| p.weakness_warning()) {
        warn(format!(
            "pointer {} has weakness ratio {:.3}; the coupling is not weak",
            p.label, p.weakness_ratio
        ));
    }
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut line = serde_json::to_string(value).expect("reports serialize");
    line.push('\n');
    line
}

fn with_record(value: &impl Serialize, record: &str) -> Value {
    let mut v = serde_json::to_value(value).expect("reports serialize");
    if let Value::Object(map) = &mut v {
        map.insert("record".into(), Value::String(record.into()));
    }
    v
}

fn cmd_run(s: &Settings) -> Result<String, CliError> {
    s.forbid("run", &["parties", "dim"])?;
    if format_of(s, Format::Jsonl)? != Format::Jsonl {
        return Err(CliError::Config("`run` writes JSON; --format csv applies to `sweep`".into()));
    }
    let cfg = protocol_config(s, false)?;
    let report = run_scheme(parsed(&s.scheme, Scheme::WeakClone)?, &cfg)?;
    Ok(json_line(&report))
}

/// 17 significant digits, enough to round-trip any double.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn slope_text(points: &[(f64, f64)]) -> Result<String, CliError> {
    match fit_convergence_slope(points) {
        Ok(v) => Ok(v.to_string()),
        Err(Error::DegenerateFit { .. }) => Ok("nan".into()),
        Err(e) => Err(e.into()),
    }
}

struct SweepRow {
    gamma: f64,
    est: [f64; 2],
    exact: [f64; 2],
    err: [f64; 2],
    ps_prob: f64,
}

fn cmd_sweep(s: &Settings) -> Result<String, CliError> {
    s.forbid("sweep", &["parties", "dim"])?;
    let mut gammas = s.gamma.clone().unwrap_or_default();
    if gammas.len() < 3 {
        return Err(CliError::Config(format!("sweep needs at least 3 --gamma values, got {}", gammas.len())));
    }
    if let Some(g) = gammas.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(CliError::Config(format!("sweep strengths must be positive, got {g}")));
    }
    if s.gamma_a.is_some() || s.gamma_b.is_some() {
        return Err(CliError::Config("sweep sets both strengths from --gamma; drop --gamma-a/--gamma-b".into()));
    }
    gammas.sort_by(|a, b| b.total_cmp(a));
    let format = format_of(s, Format::Csv)?;
    let scheme = parsed(&s.scheme, Scheme::WeakClone)?;
    let base = protocol_config(s, true)?;

    let mut rows = Vec::with_capacity(gammas.len());
    for &g in &gammas {
        let cfg = base.clone().with_gamma(g);
        let report = run_scheme(scheme, &cfg)?;
        let pick = |label: &str| {
            let p = report.pointer(label).expect("two pointers");
            let est = p.estimate.expect("γ > 0");
            (est, p.expectation, (est - p.expectation).abs())
        };
        let (a, b) = (pick("a"), pick("b"));
        rows.push(SweepRow {
            gamma: g,
            est: [a.0, b.0],
            exact: [a.1, b.1],
            err: [a.2, b.2],
            ps_prob: report.ps_probability,
        });
    }
    let slopes: Vec<String> = (0..2)
        .map(|i| slope_text(&rows.iter().map(|r| (r.gamma, r.err[i])).collect::<Vec<_>>()))
        .collect::<Result<_, _>>()?;
    let repr = base.representation.as_str();

    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(SWEEP_HEADER);
            out.push('\n');
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{repr}",
                    num(r.gamma),
                    num(r.est[0]),
                    num(r.exact[0]),
                    num(r.err[0]),
                    num(r.est[1]),
                    num(r.exact[1]),
                    num(r.err[1]),
                    num(r.ps_prob)
                );
            }
            let _ = writeln!(out, "# slope_a={} slope_b={}", slopes[0], slopes[1]);
        }
        Format::Jsonl => {
            for r in &rows {
                out.push_str(&json_line(&json!({
                    "gamma": r.gamma,
                    "est_a": r.est[0], "exact_a": r.exact[0], "err_a": r.err[0],
                    "est_b": r.est[1], "exact_b": r.exact[1], "err_b": r.err[1],
                    "ps_prob": r.ps_prob,
                    "representation": repr,
                })));
            }
            let slope = |t: &str| t.parse::<f64>().ok().filter(|v| v.is_finite());
            out.push_str(&json_line(&json!({
                "record": "summary",
                "slope_a": slope(&slopes[0]),
                "slope_b": slope(&slopes[1]),
            })));
        }
    }
    Ok(out)
}

fn cmd_chain(s: &Settings) -> Result<String, CliError> {
    s.forbid("chain", &["scheme", "dim", "layout"])?;
    if format_of(s, Format::Jsonl)? != Format::Jsonl {
        return Err(CliError::Config("`chain` writes JSON lines".into()));
    }
    let parties = s.parties.unwrap_or(2);
    if parties == 0 {
        return Err(CliError::Config("--parties must be at least 1".into()));
    }
    let cfg = ChainConfig::uniform(protocol_config(s, false)?, parties);
    let report = run_chain(&cfg)?;
    warn_weakness(&report.pointers);
    let mut out = String::new();
    for p in &report.pointers {
        out.push_str(&json_line(&with_record(p, "party")));
    }
    out.push_str(&json_line(&json!({
        "record": "summary",
        "parties": report.parties,
        "representation": report.representation,
        "ps_probability": report.ps_probability,
        "cross_check": report.cross_check,
    })));
    Ok(out)
}

fn cmd_qudit(s: &Settings) -> Result<String, CliError> {
    s.forbid("qudit", &["scheme", "parties"])?;
    if format_of(s, Format::Jsonl)? != Format::Jsonl {
        return Err(CliError::Config("`qudit` writes JSON lines".into()));
    }
    let cfg = protocol_config(s, false)?;
    let report = run_qudit(&cfg)?;
    warn_weakness(&report.pointers);
    let mut out = json_line(&with_record(&report, "run"));
    out.push_str(&json_line(&json!({
        "record": "summary",
        "dim": cfg.dim(),
        "ps_probability": report.ps_probability,
    })));
    Ok(out)
}

fn execute(command: Command) -> Result<(), CliError> {
    let (settings, runner): (Settings, fn(&Settings) -> Result<String, CliError>) = match command {
        Command::Run(s) => (s, cmd_run),
        Command::Sweep(s) => (s, cmd_sweep),
        Command::Chain(s) => (s, cmd_chain),
        Command::Qudit(s) => (s, cmd_qudit),
    };
    let settings = settings.resolve()?;
    let text = runner(&settings)?;
    match &settings.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Config(format!("cannot write output: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
