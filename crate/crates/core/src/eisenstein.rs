//! Weight-one Eisenstein series `E_{u,N}(ω) = Σ_{a∈A^r} 1/((a+u)·ω)`.
//!
//! The partial sum over `a ∈ (A_{<D})^r` equals `1/e_{V_D}(u·ω)` exactly, so it
//! is computed through the lattice product; `D` grows until the first omitted
//! layer is below the target.

use serde::{Deserialize, Serialize};

use crate::cm::UpperHalfPoint;
use crate::error::{Error, Result};
use crate::field::Ctx;
use crate::lattice::TruncationInfo;
use crate::poly::ThetaPoly;
use crate::series::RamifiedSeries;

/// `u = (v_1/N, …, v_r/N)` with `deg v_i < deg N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EisensteinSpec {
    pub level: ThetaPoly,
    pub numerators: Vec<ThetaPoly>,
}

impl EisensteinSpec {
    pub fn new(k: &Ctx, level: ThetaPoly, numerators: Vec<ThetaPoly>) -> Result<Self> {
        if !level.is_monic() {
            return Err(Error::Config("level N must be monic".into()));
        }
        if !level.is_over_fq(k) || numerators.iter().any(|v| !v.is_over_fq(k)) {
            return Err(Error::Config("level and numerators must lie in A".into()));
        }
        let reduced: Vec<ThetaPoly> =
            numerators.iter().map(|v| v.rem(k, &level)).collect::<Result<_>>()?;
        if reduced.iter().all(|v| v.is_zero()) {
            return Err(Error::Config("u must be nonzero modulo A^r".into()));
        }
        Ok(Self { level, numerators: reduced })
    }

    pub fn rank(&self) -> usize {
        self.numerators.len()
    }
}

/// Evaluation budget and working precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalBudget {
    /// Largest truncation degree `D` tried.
    pub max_degree: usize,
    /// Extra relative precision beyond the target, in indices.
    pub guard: i64,
}

impl Default for EvalBudget {
    fn default() -> Self {
        Self { max_degree: 8, guard: 24 }
    }
}

#[derive(Clone, Debug)]
pub struct EisensteinValue {
    pub value: RamifiedSeries,
    pub truncation: TruncationInfo,
    /// Estimated valuation of the omitted tail.
    pub tail_val: i64,
}

/// `x = u·ω`.
pub fn u_dot(spec: &EisensteinSpec, point: &UpperHalfPoint, rel: i64) -> Result<RamifiedSeries> {
    let k = point.ctx();
    if spec.rank() != point.rank() {
        return Err(Error::Domain("rank of u and ω differ".into()));
    }
    let num = point.lattice().combine(&spec.numerators);
    let ninv = spec.level.to_series(k).inv_rel(rel)?;
    Ok(num.mul(&ninv))
}

/// Evaluates `E_{u,N}(ω)` to absolute precision `target`.
pub fn eisenstein_eval(
    spec: &EisensteinSpec,
    point: &UpperHalfPoint,
    target: i64,
    budget: EvalBudget,
) -> Result<EisensteinValue> {
    // the sum depends only on the lattice, so a reduced basis may be used
    let lat = point.lattice().reduced()?;
    let mut rel = target + budget.guard;
    let mut last_err = None;
    let mut d = spec.level.deg().unwrap_or(0).max(1);
    while d <= budget.max_degree {
        let x = u_dot(spec, point, rel + 4 * point.ctx().m())?;
        let sub = lat.subspace_exp(d, rel)?;
        let e = sub.eval_raw(&x)?;
        if e.is_zero() {
            return Err(Error::NumericallyZero("u·ω is a lattice point".into()));
        }
        let tail = sub.reciprocal_tail(&e);
        let value = e.inv_rel(rel)?;
        if tail < target {
            d += 1;
            continue;
        }
        if value.prec() < target {
            // cancellation inside the product ate the guard digits
            let deficit = target - value.prec();
            if last_err.is_some() {
                return Err(Error::Precision(format!(
                    "Eisenstein value reached {} of {target}",
                    value.prec()
                )));
            }
            last_err = Some(deficit);
            rel += deficit + budget.guard;
            continue;
        }
        return Ok(EisensteinValue {
            value: value.truncate(target),
            truncation: sub.info(),
            tail_val: tail,
        });
    }
    Err(Error::Budget(format!(
        "Eisenstein tail not below target with D ≤ {}",
        budget.max_degree
    )))
}

/// Direct summation over `a ∈ (A_{<D})^r`; exponential in `rD`.
pub fn eisenstein_brute(
    spec: &EisensteinSpec,
    point: &UpperHalfPoint,
    d: usize,
    rel: i64,
) -> Result<RamifiedSeries> {
    let k = point.ctx();
    let lat = point.lattice();
    let r = spec.rank();
    let polys = ThetaPoly::all_below_degree(k, d);
    let n = polys.len();
    let x = u_dot(spec, point, rel)?;
    let total = n.pow(r as u32);
    let mut acc = RamifiedSeries::zero(k);
    for idx in 0..total {
        let mut rest = idx;
        let mut a = Vec::with_capacity(r);
        for _ in 0..r {
            a.push(polys[rest % n].clone());
            rest /= n;
        }
        let t = x.add(&lat.combine(&a));
        acc = acc.add(&t.inv_rel(rel)?);
    }
    Ok(acc)
}
