//! Period matrices and the rank-two Legendre determinant.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::carlitz;
use crate::drinfeld::DrinfeldModule;
use crate::error::{Error, Result};
use crate::field::Ctx;
use crate::relations::{detect_relation, RelationBounds, RelationCertificate};
use crate::series::RamifiedSeries;

/// Rows `(−w_i, F_τ(w_i), …, F_{τ^{r−1}}(w_i))` for a basis `w_1 … w_r`.
#[derive(Clone, Debug)]
pub struct PeriodMatrix {
    pub entries: Vec<Vec<RamifiedSeries>>,
    /// Worst `val(exp_φ(w_i))` seen by the period check.
    pub period_residual: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodOptions {
    pub kmax: usize,
    /// Target precision of every entry, in indices.
    pub prec: i64,
    /// `exp_φ(w)` must reach this valuation.
    pub threshold: i64,
}

/// Evaluates to `target`, retrying with more coefficients if the tail is not clear.
fn eval_growing(
    coeffs: impl Fn(usize) -> Result<crate::drinfeld::EntireSeries>,
    x: &RamifiedSeries,
    target: i64,
    kmax: usize,
) -> Result<RamifiedSeries> {
    let mut kk = kmax;
    loop {
        match coeffs(kk)?.eval(x, target) {
            Ok((v, _)) => return Ok(v),
            Err(Error::TailBound(_)) if kk < kmax + 12 => kk += 2,
            Err(e) => return Err(e),
        }
    }
}

pub fn period_matrix(phi: &DrinfeldModule, basis: &[RamifiedSeries], opts: PeriodOptions) -> Result<PeriodMatrix> {
    let r = phi.rank();
    if basis.len() != r {
        return Err(Error::Domain(format!("need {r} periods, got {}", basis.len())));
    }
    // working relative precision: enough to resolve the largest period
    let vmin = basis.iter().filter_map(|w| w.val()).min().unwrap_or(0);
    let rel = opts.prec - vmin.min(0) * phi.ctx().q() as i64 + 16 * phi.ctx().m();
    let mut residual = crate::series::EXACT;
    let mut entries = Vec::with_capacity(r);
    for (i, w) in basis.iter().enumerate() {
        let e = eval_growing(|kk| phi.exp_coeffs(kk, rel), w, opts.prec, opts.kmax)?;
        let v = e.val_or_prec();
        if v < opts.threshold {
            return Err(Error::NotPeriod(format!("basis vector {i}: exp has valuation {v}")));
        }
        residual = residual.min(v);
        let mut row = vec![w.neg()];
        for j in 1..r {
            row.push(eval_growing(|kk| phi.quasi_period_coeffs(j, kk, rel), w, opts.prec, opts.kmax)?);
        }
        entries.push(row);
    }
    Ok(PeriodMatrix { entries, period_residual: residual })
}

/// Determinant by cofactor expansion (ranks here are tiny).
pub fn determinant(k: &Arc<Ctx>, m: &[Vec<RamifiedSeries>]) -> RamifiedSeries {
    match m.len() {
        0 => RamifiedSeries::one(k),
        1 => m[0][0].clone(),
        n => {
            let mut acc = RamifiedSeries::zero(k);
            for c in 0..n {
                let minor: Vec<Vec<RamifiedSeries>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, x)| x.clone()).collect())
                    .collect();
                let term = m[0][c].mul(&determinant(k, &minor));
                acc = if c % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

#[derive(Clone, Debug)]
pub struct LegendreResult {
    /// `det(P)/π̃`.
    pub xi: RamifiedSeries,
    pub certificate: Option<RelationCertificate>,
}

/// Runs the detector on `det(P)/π̃`. A `None` certificate is inconclusive.
pub fn legendre_check(p: &PeriodMatrix, pi: &RamifiedSeries, bounds: RelationBounds) -> Result<LegendreResult> {
    let r = p.entries.len();
    if r > 2 {
        return Err(Error::Domain("the Legendre determinant is only implemented for rank ≤ 2".into()));
    }
    let k = pi.ctx();
    let det = determinant(k, &p.entries);
    let xi = det.mul(&pi.inv_rel(pi.rel_prec())?);
    let certificate = detect_relation(&xi, bounds)?;
    Ok(LegendreResult { xi, certificate })
}

/// The CM module `ψ_θ = y² + (y + y^q)τ + τ²` with `y = θ^{1/2}`, the `F_q[y]`
/// Carlitz module viewed over `A`, and its periods `(y·π̃_y, π̃_y)`.
pub fn sqrt_theta_cm_module(k: &Arc<Ctx>, prec: i64) -> Result<(DrinfeldModule, Vec<RamifiedSeries>, RamifiedSeries)> {
    let m = k.m();
    if m % 2 != 0 {
        return Err(Error::Config("θ^{1/2} needs an even ramification index m".into()));
    }
    let y = RamifiedSeries::theta_frac(k, m / 2);
    let yq = RamifiedSeries::theta_frac(k, (m / 2) * k.q() as i64);
    let phi = DrinfeldModule::new(k, vec![y.add(&yq), RamifiedSeries::one(k)])?;
    let pi_y = carlitz::generalized_period(k, &y, prec + m)?;
    let periods = vec![pi_y.mul(&y).truncate(prec), pi_y.truncate(prec)];
    Ok((phi, periods, pi_y))
}
