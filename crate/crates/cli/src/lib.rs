//! Front end for `drinfeld-core`: configuration, commands and reports.

pub mod config;
pub mod suites;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand};
use drinfeld_core::cm::parse_point;
use drinfeld_core::eisenstein::{eisenstein_eval, EisensteinSpec, EvalBudget};
use drinfeld_core::poly::ThetaPoly;
use drinfeld_core::report::CheckRecord;
use drinfeld_core::serial::{series_to_json, series_to_text};
use drinfeld_core::Ctx;
use serde_json::json;
use thiserror::Error;

use config::{ConfigFlags, RunConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] drinfeld_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use drinfeld_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Core(E::Config(_) | E::Parse(_)) => EXIT_CONFIG,
            CliError::Core(E::Budget(_) | E::TailBound(_)) => EXIT_BUDGET,
            _ => EXIT_FAIL,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "drinfeld", version, about = "Drinfeld modules and Drinfeld modular forms over F_q[θ]")]
pub struct Cli {
    #[command(flatten)]
    pub flags: ConfigFlags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Prints the Carlitz period and the valuation of exp_C at it.
    Carlitz,
    /// Runs a verification suite and writes a JSON report.
    Verify {
        /// exp, quasi, omega, automorphy, levelchange, expansion, legendre, cm or independence.
        suite: String,
    },
    /// Evaluates the weight-one Eisenstein series E_{u,N} at a point.
    Eisenstein {
        /// Comma-separated entries of u, e.g. `1/θ,0`.
        #[arg(long)]
        u: String,
        /// Level N (monic).
        #[arg(long = "N")]
        n: String,
        /// `sqrt_theta`, `kummerR`, `quadratic:a;b`, or explicit coordinates.
        #[arg(long)]
        point: String,
    },
}

/// Parses argv and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Carlitz => cmd_carlitz(&cfg),
        Command::Verify { suite } => cmd_verify(suite, &cfg),
        Command::Eisenstein { u, n, point } => cmd_eisenstein(u, n, point, &cfg),
    })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

pub fn cmd_carlitz(cfg: &RunConfig) -> Result<i32, CliError> {
    cfg.require_carlitz()?;
    let k = cfg.ctx()?;
    let prec = cfg.prec_idx();
    let pi = drinfeld_core::carlitz::carlitz_period(&k, prec)?;
    let residual = suites::carlitz_residual(&k, cfg.kmax, prec)?;
    let thr = cfg.threshold_for(prec);
    let abs = -pi.val().expect("π̃ is nonzero");
    let rec = CheckRecord::new(&k, "carlitz_kernel", 0, residual, thr);
    let text = format!(
        "pi = {}\n|pi| = {}^({})\nexp_C(pi): valuation {} (threshold {}) {}\n",
        series_to_text(&pi),
        k.q(),
        k.fmt_units(abs),
        rec.residual_valuation,
        k.fmt_units(thr),
        if rec.pass { "PASS" } else { "FAIL" }
    );
    write_output(cfg.out.as_deref(), &text)?;
    Ok(if rec.pass { EXIT_PASS } else { EXIT_FAIL })
}

/// Serialized report: a JSON array of check records, one per line.
pub fn render_report(records: &[CheckRecord]) -> String {
    let lines: Vec<String> = records.iter().map(|r| serde_json::to_string(r).expect("record serializes")).collect();
    format!("[\n{}\n]\n", lines.join(",\n"))
}

pub fn cmd_verify(suite: &str, cfg: &RunConfig) -> Result<i32, CliError> {
    let out = suites::run_suite(suite, cfg)?;
    write_output(cfg.out.as_deref(), &render_report(&out.records))?;
    if let Some(arts) = &out.artifacts {
        let text = serde_json::to_string_pretty(arts).expect("artifacts serialize") + "\n";
        match &cfg.certs {
            Some(p) => std::fs::write(p, text)?,
            None => eprint!("{text}"),
        }
    }
    Ok(if out.records.iter().all(|r| r.pass) { EXIT_PASS } else { EXIT_FAIL })
}

/// Parses `u` entries `a/b` (or `0`) into numerators over `N`.
pub fn parse_u(k: &Ctx, u: &str, n: &ThetaPoly) -> Result<Vec<ThetaPoly>, CliError> {
    u.split(',')
        .map(|e| {
            let e = e.trim();
            let (a, b) = match e.split_once('/') {
                Some((a, b)) => (ThetaPoly::parse(k, a)?, ThetaPoly::parse(k, b)?),
                None => (ThetaPoly::parse(k, e)?, ThetaPoly::one()),
            };
            if b.is_zero() {
                return Err(CliError::Config(format!("zero denominator in `{e}`")));
            }
            let (cof, rem) = n.divrem(k, &b)?;
            if !rem.is_zero() {
                return Err(CliError::Config(format!("denominator of `{e}` does not divide N")));
            }
            Ok(a.mul(k, &cof))
        })
        .collect()
}

pub fn cmd_eisenstein(u: &str, n: &str, point: &str, cfg: &RunConfig) -> Result<i32, CliError> {
    let k = cfg.ctx()?;
    let level = ThetaPoly::parse(&k, &n.replace("theta", "θ"))?;
    let nums = parse_u(&k, u, &level)?;
    let spec = EisensteinSpec::new(&k, level, nums)?;
    let prec = cfg.prec_idx();
    let w = parse_point(&k, point, prec)?;
    let budget = EvalBudget { max_degree: cfg.deg_budget, ..EvalBudget::default() };
    let v = eisenstein_eval(&spec, &w, prec, budget)?;
    let doc = json!({
        "u": u,
        "N": n,
        "point": point,
        "value": series_to_json(&v.value),
        "text": series_to_text(&v.value),
        "prec": k.fmt_units(v.value.prec()),
        "truncation": v.truncation,
        "tail_valuation": drinfeld_core::report::fmt_residual(&k, v.tail_val),
    });
    write_output(cfg.out.as_deref(), &(serde_json::to_string_pretty(&doc).expect("json") + "\n"))?;
    Ok(EXIT_PASS)
}
