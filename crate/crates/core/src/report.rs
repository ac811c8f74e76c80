//! Pass/fail records shared by every verification suite.

use serde::{Deserialize, Serialize};

use crate::field::Ctx;
use crate::series::EXACT;

/// One row of a report: `residual_valuation` is a rational in `θ`-units, or
/// `inf` for an exact zero residual.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub sample: usize,
    pub residual_valuation: String,
    pub pass: bool,
}

impl CheckRecord {
    /// `residual` and `threshold` are in indices.
    pub fn new(k: &Ctx, check: &str, sample: usize, residual: i64, threshold: i64) -> Self {
        Self {
            check: check.to_string(),
            sample,
            residual_valuation: fmt_residual(k, residual),
            pass: residual >= threshold,
        }
    }

    /// A row for a check that could not be carried out.
    pub fn failed(check: &str, sample: usize, why: &str) -> Self {
        Self {
            check: check.to_string(),
            sample,
            residual_valuation: format!("error: {why}"),
            pass: false,
        }
    }
}

pub fn fmt_residual(k: &Ctx, v: i64) -> String {
    if v >= EXACT {
        "inf".to_string()
    } else {
        k.fmt_units(v)
    }
}

/// Minimum residual in indices, `EXACT` for an empty list.
pub fn min_residual(vals: impl IntoIterator<Item = i64>) -> i64 {
    vals.into_iter().min().unwrap_or(EXACT)
}
