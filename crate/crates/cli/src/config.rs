//! Run configuration: defaults, `key = value` files and flag overrides.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use drinfeld_core::{Ctx, FieldParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub p: u32,
    pub e: u32,
    pub s: u32,
    pub m: u32,
    /// Target precision in `θ`-units.
    pub prec: i64,
    pub t_order: usize,
    /// Largest enumeration degree `D` for lattice sums.
    pub deg_budget: usize,
    pub kmax: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Certificates and other artifacts, when a suite produces them.
    pub certs: Option<PathBuf>,
    pub threads: Option<usize>,
    /// Pass iff residual valuation ≥ `threshold · prec`.
    pub threshold: f64,
    /// Number of random samples per suite.
    pub samples: usize,
    /// Number of points of the upper half plane per suite.
    pub points: usize,
    /// Detector bounds.
    pub rel_d: usize,
    pub rel_h: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p: 2,
            e: 1,
            s: 1,
            m: 1,
            prec: 80,
            t_order: 12,
            deg_budget: 14,
            kmax: 24,
            seed: 0,
            out: None,
            certs: None,
            threads: None,
            threshold: 0.6,
            samples: 3,
            points: 3,
            rel_d: 4,
            rel_h: 8,
        }
    }
}

/// Flags shared by every subcommand; each one overrides the config file.
#[derive(Args, Clone, Debug, Default)]
pub struct ConfigFlags {
    /// Line-based `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub p: Option<u32>,
    #[arg(long, global = true)]
    pub e: Option<u32>,
    #[arg(long, global = true)]
    pub s: Option<u32>,
    #[arg(long, global = true)]
    pub m: Option<u32>,
    #[arg(long, global = true)]
    pub prec: Option<i64>,
    #[arg(long = "t-order", global = true)]
    pub t_order: Option<usize>,
    #[arg(long = "deg-budget", global = true)]
    pub deg_budget: Option<usize>,
    #[arg(long, global = true)]
    pub kmax: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub certs: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub points: Option<usize>,
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Config(format!("bad value `{v}` for `{key}`")))
}

impl RunConfig {
    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, val) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            let (key, val) = (key.trim(), val.trim());
            match key {
                "p" => self.p = parse_value(key, val)?,
                "e" => self.e = parse_value(key, val)?,
                "s" => self.s = parse_value(key, val)?,
                "m" => self.m = parse_value(key, val)?,
                "prec" => self.prec = parse_value(key, val)?,
                "t_order" => self.t_order = parse_value(key, val)?,
                "deg_budget" => self.deg_budget = parse_value(key, val)?,
                "kmax" => self.kmax = parse_value(key, val)?,
                "seed" => self.seed = parse_value(key, val)?,
                "out" => self.out = Some(PathBuf::from(val)),
                "certs" => self.certs = Some(PathBuf::from(val)),
                "threads" => self.threads = Some(parse_value(key, val)?),
                "threshold" => self.threshold = parse_value(key, val)?,
                "samples" => self.samples = parse_value(key, val)?,
                "points" => self.points = parse_value(key, val)?,
                "rel_d" => self.rel_d = parse_value(key, val)?,
                "rel_h" => self.rel_h = parse_value(key, val)?,
                other => return Err(CliError::Config(format!("unknown config key `{other}`"))),
            }
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn resolve(flags: &ConfigFlags) -> Result<Self, CliError> {
        let mut cfg = match &flags.config {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        macro_rules! over {
            ($($f:ident),*) => { $( if let Some(v) = flags.$f.clone() { cfg.$f = v; } )* };
        }
        over!(p, e, s, m, prec, t_order, deg_budget, kmax, seed, threshold, samples, points);
        if flags.out.is_some() {
            cfg.out = flags.out.clone();
        }
        if flags.certs.is_some() {
            cfg.certs = flags.certs.clone();
        }
        if flags.threads.is_some() {
            cfg.threads = flags.threads;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("prec", self.prec > 0),
            ("t_order", self.t_order > 0),
            ("deg_budget", self.deg_budget > 0),
            ("kmax", self.kmax > 0),
            ("samples", self.samples > 0),
            ("points", self.points > 0),
            ("rel_d", self.rel_d > 0),
            ("threads", self.threads.is_none_or(|t| t > 0)),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, ok)| !ok) {
            return Err(CliError::Config(format!("`{name}` must be positive")));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(CliError::Config("threshold must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> FieldParams {
        FieldParams::new(self.p, self.e, self.s, self.m)
    }

    pub fn ctx(&self) -> Result<Arc<Ctx>, CliError> {
        Ok(Ctx::new(self.params())?)
    }

    pub fn q(&self) -> u64 {
        self.params().q()
    }

    /// Precision in indices.
    pub fn prec_idx(&self) -> i64 {
        self.prec * self.m as i64
    }

    /// Pass threshold in indices for a given precision in indices.
    pub fn threshold_for(&self, prec_idx: i64) -> i64 {
        (self.threshold * prec_idx as f64).ceil() as i64
    }

    /// Fails with a config error unless the Carlitz period is representable.
    pub fn require_carlitz(&self) -> Result<(), CliError> {
        let q1 = self.q() - 1;
        if self.m as u64 % q1 != 0 {
            return Err(CliError::Config(format!(
                "the Carlitz period needs (q-1) | m; q = {}, m = {}",
                self.q(),
                self.m
            )));
        }
        Ok(())
    }
}
