//! Algebraic relation detection for series, by exact linear algebra.
//!
//! A candidate `P(X) = Σ c_{ij} θ^{j/μ} X^i` is parametrized by its `F_p`
//! coordinates; demanding that every digit of `P(ξ)` below `v_t` vanish is
//! an `F_p`-linear system, and any kernel vector is a relation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Ctx, Fe};
use crate::linalg::FpMatrix;
use crate::series::{RamifiedSeries, EXACT};

/// Digits reserved between the target valuation and the available precision.
pub const SLACK: i64 = 10;

/// Where the coefficients of `P` live.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffRing {
    /// `A = F_q[θ]`.
    Base,
    /// `F_{q^s}[θ^{1/m}]`.
    Extended,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationBounds {
    /// Degree in `X`.
    pub d: usize,
    /// Coefficient height: exponents of `θ` are `< h + 1`.
    pub h: usize,
    /// Target valuation of `P(ξ)`, in indices.
    pub v_t: i64,
    pub ring: CoeffRing,
}

/// `P(X)`, with `coeffs[i][j]` the coefficient of `θ^{j/μ} X^i`, where
/// `μ = 1` over `A` and `μ = m` over the extended ring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelPoly {
    pub ring: CoeffRing,
    pub denom: i64,
    pub coeffs: Vec<Vec<Fe>>,
}

impl RelPoly {
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| c.iter().any(|x| !x.is_zero()))
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    /// The `X^i` coefficient as an exact series.
    pub fn coeff_series(&self, k: &Arc<Ctx>, i: usize) -> RamifiedSeries {
        let step = k.m() / self.denom;
        self.coeffs[i].iter().enumerate().fold(RamifiedSeries::zero(k), |acc, (j, &c)| {
            if c.is_zero() {
                acc
            } else {
                acc.add(&RamifiedSeries::monomial(k, c, -(j as i64) * step))
            }
        })
    }

    /// `P(ξ)` by Horner's rule.
    pub fn eval(&self, k: &Arc<Ctx>, xi: &RamifiedSeries) -> RamifiedSeries {
        let mut acc = RamifiedSeries::zero(k);
        for i in (0..self.coeffs.len()).rev() {
            acc = acc.mul(xi).add(&self.coeff_series(k, i));
        }
        acc
    }

    /// Scales so that the highest `θ`-term of the leading `X`-coefficient is `1`.
    pub fn normalized(&self, k: &Ctx) -> Result<Self> {
        let d = self.degree().ok_or(Error::DivisionByZero)?;
        let lead = *self.coeffs[d].iter().rev().find(|x| !x.is_zero()).unwrap();
        let inv = k.inv(lead)?;
        let mut out = self.clone();
        for row in &mut out.coeffs {
            for c in row.iter_mut() {
                *c = k.mul(*c, inv);
            }
        }
        out.coeffs.truncate(d + 1);
        for row in &mut out.coeffs {
            while row.last().is_some_and(|c| c.is_zero()) {
                row.pop();
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCertificate {
    #[serde(rename = "P")]
    pub p: RelPoly,
    /// Re-evaluated valuation of `P(ξ)` in indices (`EXACT` if zero exactly).
    pub val: i64,
    pub bounds: RelationBounds,
    /// Absolute precision of `ξ` used.
    pub prec: i64,
}

/// `F_p`-basis of the coefficient field of the ring.
fn coefficient_basis(k: &Ctx, ring: CoeffRing) -> Vec<Fe> {
    let p = k.p() as u32;
    match ring {
        CoeffRing::Extended => (0..k.degree_over_prime()).map(|t| Fe(p.pow(t) as u16)).collect(),
        CoeffRing::Base => {
            let e = k.params().e;
            if e == 1 {
                return vec![Fe::ONE];
            }
            // powers of a generator of F_q^×
            let g = k.exp(((k.size() - 1) / (k.q() as usize - 1)) as u32);
            let mut out = vec![Fe::ONE];
            for _ in 1..e {
                out.push(k.mul(*out.last().unwrap(), g));
            }
            out
        }
    }
}

fn ring_denom(k: &Ctx, ring: CoeffRing) -> i64 {
    match ring {
        CoeffRing::Base => 1,
        CoeffRing::Extended => k.m(),
    }
}

/// One column of the system: the `F_p` digits of `s` at indices `lo..hi`.
fn digit_column(k: &Ctx, s: &RamifiedSeries, lo: i64, hi: i64) -> Vec<u32> {
    let n = k.degree_over_prime() as usize;
    let mut col = Vec::with_capacity(((hi - lo) as usize) * n);
    for idx in lo..hi {
        col.extend(k.digits(s.coeff(idx)));
    }
    col
}

/// Solves for the smallest relation of a given shape; `monomials` lists the
/// series `θ^{j/μ}·M` for each unknown slot, tagged with its slot index.
fn solve_slots(
    k: &Arc<Ctx>,
    slots: &[RamifiedSeries],
    basis: &[Fe],
    v_t: i64,
) -> Result<Option<Vec<Fe>>> {
    let lo = slots.iter().filter_map(|s| s.val()).min().unwrap_or(v_t).min(v_t);
    let mut cols = Vec::with_capacity(slots.len() * basis.len());
    for s in slots {
        for &b in basis {
            cols.push(digit_column(k, &s.scale(b), lo, v_t));
        }
    }
    let rows = ((v_t - lo) as usize) * k.degree_over_prime() as usize;
    let m = FpMatrix::from_columns(k.p(), rows, &cols)?;
    let ker = m.kernel();
    let Some(x) = ker.first() else {
        return Ok(None);
    };
    // back to coefficients: Σ_t x_t b_t per slot
    let mut out = Vec::with_capacity(slots.len());
    for (si, _) in slots.iter().enumerate() {
        let mut c = Fe::ZERO;
        for (bi, &b) in basis.iter().enumerate() {
            let xv = x[si * basis.len() + bi];
            if xv != 0 {
                c = k.add(c, k.mul(k.from_int(xv as i64), b));
            }
        }
        out.push(c);
    }
    Ok(Some(out))
}

/// Searches `deg_X ≤ d`, then the exponent bound `J`, in increasing order;
/// the first hit is normalized and re-verified.
pub fn detect_relation(xi: &RamifiedSeries, bounds: RelationBounds) -> Result<Option<RelationCertificate>> {
    let k = xi.ctx().clone();
    if bounds.d == 0 {
        return Err(Error::Config("relation degree bound must be at least 1".into()));
    }
    let denom = ring_denom(&k, bounds.ring);
    let step = k.m() / denom;
    let jcount = (bounds.h as i64 + 1) * denom;
    let mut powers = vec![RamifiedSeries::one(&k)];
    for i in 1..=bounds.d {
        powers.push(powers[i - 1].mul(xi));
    }
    // the worst column is θ^{h+…} ξ^i
    let worst = powers
        .iter()
        .map(|s| s.prec() - (jcount - 1) * step)
        .min()
        .unwrap();
    if bounds.v_t > worst.saturating_sub(SLACK) {
        return Err(Error::Precision(format!(
            "target {} exceeds available precision {} minus slack {SLACK}",
            bounds.v_t, worst
        )));
    }
    let basis = coefficient_basis(&k, bounds.ring);
    for d in 1..=bounds.d {
        for jmax in 0..jcount {
            let mut slots = Vec::new();
            let mut shape = Vec::new();
            for (i, pw) in powers.iter().take(d + 1).enumerate() {
                for j in 0..=jmax {
                    slots.push(pw.mul(&RamifiedSeries::monomial(&k, Fe::ONE, -j * step)));
                    shape.push((i, j as usize));
                }
            }
            let Some(sol) = solve_slots(&k, &slots, &basis, bounds.v_t)? else {
                continue;
            };
            let mut coeffs = vec![vec![Fe::ZERO; jmax as usize + 1]; d + 1];
            for ((i, j), c) in shape.into_iter().zip(sol) {
                coeffs[i][j] = c;
            }
            let p = RelPoly { ring: bounds.ring, denom, coeffs };
            if p.degree().unwrap_or(0) == 0 {
                // a pure θ-polynomial kills nothing
                continue;
            }
            let p = p.normalized(&k)?;
            let val = p.eval(&k, xi).val_or_prec();
            if val < bounds.v_t {
                return Err(Error::Precision("relation failed re-verification".into()));
            }
            return Ok(Some(RelationCertificate { p, val, bounds, prec: xi.prec() }));
        }
    }
    Ok(None)
}

/// Certification of one labelled value against a reference.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmEntry {
    pub label: String,
    pub certificate: Option<RelationCertificate>,
    /// Set when the query could not be run (e.g. not enough precision).
    pub inconclusive: Option<String>,
}

/// Runs the detector on `value / reference` for each value.
pub fn cm_value_certify(
    values: &[(String, RamifiedSeries)],
    reference: &RamifiedSeries,
    bounds: RelationBounds,
    rel: i64,
) -> Result<Vec<CmEntry>> {
    let rinv = reference.inv_rel(rel)?;
    Ok(values
        .iter()
        .map(|(label, v)| {
            let ratio = v.mul(&rinv);
            match detect_relation(&ratio, bounds) {
                Ok(certificate) => CmEntry { label: label.clone(), certificate, inconclusive: None },
                Err(e) => CmEntry { label: label.clone(), certificate: None, inconclusive: Some(e.to_string()) },
            }
        })
        .collect())
}

/// Exponent vectors of total degree `≤ deg` in graded lexicographic order,
/// with `caps[i]` an exclusive bound on the `i`-th exponent.
pub fn graded_lex_monomials(n: usize, deg: usize, caps: &[usize]) -> Vec<Vec<usize>> {
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, caps: &[usize], out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for e in (0..=left.min(caps[i].saturating_sub(1))).rev() {
            cur[i] = e;
            rec(i + 1, left - e, cur, caps, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    for t in 0..=deg {
        let mut cur = vec![0; n];
        rec(0, t, &mut cur, caps, &mut out);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeBounds {
    pub total_degree: usize,
    pub h: usize,
    pub v_t: i64,
    pub ring: CoeffRing,
}

/// A multivariate relation `Σ c_e(θ) X^e` found by the probe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossRelation {
    pub monomials: Vec<Vec<usize>>,
    /// `coeffs[t][j]` multiplies `θ^{j/μ} X^{monomials[t]}`.
    pub coeffs: Vec<Vec<Fe>>,
    pub val: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub univariate: Vec<Option<RelationCertificate>>,
    /// Relations outside the ideal generated by the univariate ones.
    pub cross: Option<CrossRelation>,
    pub monomial_count: usize,
    pub bounds: ProbeBounds,
    /// A `None` here is bounded evidence only, not a proof of independence.
    pub note: String,
}

/// Searches for univariate relations of each value, then for a relation among
/// the monomials reduced modulo those (exponent of `X_i` below its degree).
pub fn independence_probe(values: &[RamifiedSeries], bounds: ProbeBounds) -> Result<IndependenceReport> {
    let n = values.len();
    if n == 0 {
        return Err(Error::Config("nothing to probe".into()));
    }
    let k = values[0].ctx().clone();
    let mut univariate = Vec::with_capacity(n);
    let mut caps = Vec::with_capacity(n);
    for v in values {
        let c = detect_relation(
            v,
            RelationBounds { d: bounds.total_degree, h: bounds.h, v_t: bounds.v_t, ring: bounds.ring },
        )?;
        caps.push(c.as_ref().and_then(|c| c.p.degree()).unwrap_or(usize::MAX));
        univariate.push(c);
    }
    let monomials = graded_lex_monomials(n, bounds.total_degree, &caps);
    let denom = ring_denom(&k, bounds.ring);
    let step = k.m() / denom;
    let jcount = (bounds.h as i64 + 1) * denom;
    let mut mono_series = Vec::with_capacity(monomials.len());
    for e in &monomials {
        let mut s = RamifiedSeries::one(&k);
        for (v, &ei) in values.iter().zip(e) {
            for _ in 0..ei {
                s = s.mul(v);
            }
        }
        mono_series.push(s);
    }
    let worst = mono_series.iter().map(|s| s.prec()).min().unwrap_or(EXACT) - (jcount - 1) * step;
    if bounds.v_t > worst.saturating_sub(SLACK) {
        return Err(Error::Precision(format!(
            "probe target {} exceeds available precision {worst} minus slack",
            bounds.v_t
        )));
    }
    let mut slots = Vec::new();
    let mut shape = Vec::new();
    for (t, s) in mono_series.iter().enumerate() {
        for j in 0..jcount {
            slots.push(s.mul(&RamifiedSeries::monomial(&k, Fe::ONE, -j * step)));
            shape.push((t, j as usize));
        }
    }
    let basis = coefficient_basis(&k, bounds.ring);
    let cross = match solve_slots(&k, &slots, &basis, bounds.v_t)? {
        None => None,
        Some(sol) => {
            let mut coeffs = vec![vec![Fe::ZERO; jcount as usize]; monomials.len()];
            for ((t, j), c) in shape.into_iter().zip(sol) {
                coeffs[t][j] = c;
            }
            let mut acc = RamifiedSeries::zero(&k);
            for (t, row) in coeffs.iter().enumerate() {
                for (j, &c) in row.iter().enumerate() {
                    if !c.is_zero() {
                        let mono = RamifiedSeries::monomial(&k, c, -(j as i64) * step);
                        acc = acc.add(&mono.mul(&mono_series[t]));
                    }
                }
            }
            Some(CrossRelation { monomials: monomials.clone(), coeffs, val: acc.val_or_prec() })
        }
    };
    Ok(IndependenceReport {
        univariate,
        cross,
        monomial_count: monomials.len(),
        bounds,
        note: "bounded search; absence of a relation is evidence, not proof".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrdegPrediction {
    pub ranks: Vec<usize>,
    pub predicted: usize,
    pub pairwise_disjoint: bool,
    pub galois: bool,
    /// `r²/s` when a single module with CM degree `s` was given.
    pub single_module: Option<usize>,
}

/// `Σ r_i − (n − 1)`; for one module with `s` supplied, also `r²/s`.
pub fn trdeg_predict(
    ranks: &[usize],
    pairwise_disjoint: bool,
    galois: bool,
    s: Option<usize>,
) -> Result<TrdegPrediction> {
    if ranks.is_empty() {
        return Err(Error::Config("need at least one rank".into()));
    }
    let n = ranks.len();
    let predicted = ranks.iter().sum::<usize>() - (n - 1);
    let single_module = match (n, s) {
        (1, Some(s)) => {
            let r = ranks[0];
            if s == 0 || r % s != 0 {
                return Err(Error::Domain(format!("CM degree {s} must divide the rank {r}")));
            }
            Some(r * r / s)
        }
        _ => None,
    };
    Ok(TrdegPrediction { ranks: ranks.to_vec(), predicted, pairwise_disjoint, galois, single_module })
}
