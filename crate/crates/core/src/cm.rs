//! Points of the Drinfeld upper half plane and CM constructors.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Ctx;
use crate::lattice::{imag_abs, omega_r_check, Lattice, Separation};
use crate::poly::ThetaPoly;
use crate::series::{RamifiedSeries, EXACT};

/// Tested degree for the finite `Ω^r` certification.
pub const DEFAULT_TEST_DEGREE: usize = 4;

/// `ω = (w_1, …, w_{r−1}, 1)`.
#[derive(Clone, Debug)]
pub struct UpperHalfPoint {
    coords: Vec<RamifiedSeries>,
    separation: Option<Separation>,
}

impl UpperHalfPoint {
    /// Wraps coordinates without certification; the last one must be `1`.
    pub fn new(coords: Vec<RamifiedSeries>) -> Result<Self> {
        let last = coords.last().ok_or_else(|| Error::Domain("empty point".into()))?;
        let k = last.ctx().clone();
        if !last.sub(&RamifiedSeries::one(&k)).is_zero() || !last.is_exact() {
            return Err(Error::Domain("last coordinate must be exactly 1".into()));
        }
        Ok(Self { coords, separation: None })
    }

    /// Wraps and certifies at degree `d`.
    pub fn certified(coords: Vec<RamifiedSeries>, d: usize) -> Result<Self> {
        let mut p = Self::new(coords)?;
        p.certify(d)?;
        Ok(p)
    }

    pub fn certify(&mut self, d: usize) -> Result<&Separation> {
        if self.coords.len() >= 2 {
            for w in &self.coords[..self.coords.len() - 1] {
                if imag_abs(w).is_none() {
                    return Err(Error::Domain("a coordinate lies in K_∞".into()));
                }
            }
        }
        let s = omega_r_check(&self.coords, d)?;
        self.separation = Some(s);
        Ok(self.separation.as_ref().unwrap())
    }

    pub fn separation(&self) -> Option<&Separation> {
        self.separation.as_ref()
    }

    pub fn coords(&self) -> &[RamifiedSeries] {
        &self.coords
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn ctx(&self) -> &Arc<Ctx> {
        self.coords[0].ctx()
    }

    /// `Λ_ω = A w_1 + … + A w_r`.
    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.ctx(), self.coords.clone()).expect("nonempty")
    }

    /// `ω̃ = (w_2, …, w_r)`.
    pub fn tail(&self) -> Result<UpperHalfPoint> {
        if self.rank() < 2 {
            return Err(Error::Domain("rank-one point has no tail".into()));
        }
        UpperHalfPoint::new(self.coords[1..].to_vec())
    }
}

/// Named CM constructions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CmKind {
    SqrtTheta,
    /// `w = a + √b`.
    Quadratic { a: ThetaPoly, b: ThetaPoly },
    /// `(θ^{1/r}, …, θ^{(r−1)/r}, 1)`.
    Kummer { r: usize },
}

/// A CM point with its multiplier `c` and the matrix `M` over `A` with
/// `c·ω = M·ω`.
#[derive(Clone, Debug)]
pub struct CmPoint {
    pub point: UpperHalfPoint,
    pub multiplier: RamifiedSeries,
    pub matrix: Vec<Vec<ThetaPoly>>,
    /// Valuation of the worst entry of `c·ω − M·ω`.
    pub inclusion_residual: i64,
}

fn mat_times(k: &Arc<Ctx>, m: &[Vec<ThetaPoly>], w: &[RamifiedSeries]) -> Vec<RamifiedSeries> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(w)
                .fold(RamifiedSeries::zero(k), |acc, (a, x)| acc.add(&a.to_series(k).mul(x)))
        })
        .collect()
}

/// Builds the CM point, failing when the configured field cannot host it.
pub fn cm_point(k: &Arc<Ctx>, kind: &CmKind, rel: i64) -> Result<CmPoint> {
    let m = k.m();
    let (coords, mult, matrix) = match kind {
        CmKind::SqrtTheta => {
            if m % 2 != 0 {
                return Err(Error::Config("θ^{1/2} needs an even ramification index m".into()));
            }
            let w = RamifiedSeries::theta_frac(k, m / 2);
            let mat = vec![
                vec![ThetaPoly::zero(), ThetaPoly::theta()],
                vec![ThetaPoly::one(), ThetaPoly::zero()],
            ];
            (vec![w.clone(), RamifiedSeries::one(k)], w, mat)
        }
        CmKind::Kummer { r } => {
            let r = *r;
            if r < 2 {
                return Err(Error::Domain("Kummer points need r ≥ 2".into()));
            }
            if m % r as i64 != 0 {
                return Err(Error::Config(format!("θ^(1/{r}) needs r | m (m = {m})")));
            }
            if r as u32 % k.p() == 0 {
                return Err(Error::Domain(format!("θ^(1/{r}) is inseparable in characteristic {}", k.p())));
            }
            let step = m / r as i64;
            let mut coords: Vec<RamifiedSeries> =
                (1..r as i64).map(|i| RamifiedSeries::theta_frac(k, i * step)).collect();
            coords.push(RamifiedSeries::one(k));
            let mut mat = vec![vec![ThetaPoly::zero(); r]; r];
            for i in 0..r - 2 {
                mat[i][i + 1] = ThetaPoly::one();
            }
            mat[r - 2][r - 1] = ThetaPoly::theta();
            mat[r - 1][0] = ThetaPoly::one();
            (coords, RamifiedSeries::theta_frac(k, step), mat)
        }
        CmKind::Quadratic { a, b } => {
            if !a.is_over_fq(k) || !b.is_over_fq(k) {
                return Err(Error::Domain("a and b must lie in A".into()));
            }
            let root = b.to_series(k).nth_root(2, rel)?;
            if imag_abs(&root).is_none() {
                return Err(Error::Domain("√b lies in K_∞: not a CM point of Ω^2".into()));
            }
            let w = a.to_series(k).add(&root);
            let mat = vec![
                vec![a.clone(), b.sub(k, &a.mul(k, a))],
                vec![ThetaPoly::one(), a.neg(k)],
            ];
            (vec![w, RamifiedSeries::one(k)], root, mat)
        }
    };
    let lhs: Vec<RamifiedSeries> = coords.iter().map(|w| mult.mul(w)).collect();
    let rhs = mat_times(k, &matrix, &coords);
    let inclusion_residual = lhs
        .iter()
        .zip(&rhs)
        .map(|(x, y)| x.sub(y).val_or_prec())
        .min()
        .unwrap_or(EXACT);
    let d = DEFAULT_TEST_DEGREE.min(if coords.len() > 2 { 3 } else { 4 });
    let point = UpperHalfPoint::certified(coords, d)?;
    Ok(CmPoint { point, multiplier: mult, matrix, inclusion_residual })
}

/// Parses an explicit point such as `θ^(1/2)+θ^(-1/2), 1` or a named kind
/// (`sqrt_theta`, `kummer3`, `quadratic:a;b`).
pub fn parse_point(k: &Arc<Ctx>, text: &str, rel: i64) -> Result<UpperHalfPoint> {
    let t = text.trim();
    if t == "sqrt_theta" {
        return Ok(cm_point(k, &CmKind::SqrtTheta, rel)?.point);
    }
    if let Some(r) = t.strip_prefix("kummer") {
        let r = r.trim_start_matches('_').parse().map_err(|_| Error::Parse(format!("bad point `{t}`")))?;
        return Ok(cm_point(k, &CmKind::Kummer { r }, rel)?.point);
    }
    if let Some(rest) = t.strip_prefix("quadratic:") {
        let (a, b) = rest.split_once(';').ok_or_else(|| Error::Parse("quadratic:a;b".into()))?;
        let kind = CmKind::Quadratic { a: ThetaPoly::parse(k, a)?, b: ThetaPoly::parse(k, b)? };
        return Ok(cm_point(k, &kind, rel)?.point);
    }
    let coords: Result<Vec<RamifiedSeries>> = t.split(',').map(|e| parse_monomial_sum(k, e)).collect();
    UpperHalfPoint::certified(coords?, DEFAULT_TEST_DEGREE)
}

/// Parses sums of terms `c*θ^(a/b)` (also `theta`, `t`) with integer `c`.
pub fn parse_monomial_sum(k: &Arc<Ctx>, text: &str) -> Result<RamifiedSeries> {
    let s: String = text.replace("theta", "θ").replace('t', "θ").chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("bad ramified monomial sum `{text}`"));
    if s.is_empty() {
        return Err(bad());
    }
    let mut terms = Vec::new();
    let mut cur = String::new();
    let mut depth = 0;
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if (ch == '+' || ch == '-') && depth == 0 && !cur.is_empty() && !cur.ends_with('^') {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);
    let mut acc = RamifiedSeries::zero(k);
    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(b) => (-1i64, b),
            None => (1, term.trim_start_matches('+')),
        };
        let (coef, idx) = match body.split_once('θ') {
            None => (body.parse::<i64>().map_err(|_| bad())?, 0i64),
            Some((c, e)) => {
                let c = c.trim_end_matches('*');
                let c = if c.is_empty() { 1 } else { c.parse().map_err(|_| bad())? };
                let e = if e.is_empty() {
                    k.m()
                } else {
                    let e = e.strip_prefix('^').ok_or_else(bad)?;
                    let e = e.trim_start_matches('(').trim_end_matches(')');
                    let e = e.trim_start_matches('{').trim_end_matches('}');
                    crate::field::parse_units(e, k.m())?
                };
                (c, -e)
            }
        };
        acc = acc.add(&RamifiedSeries::monomial(k, k.from_int(sign * coef), idx));
    }
    Ok(acc)
}

/// Seeded generic sample points of `Ω^2` of the shape
/// `w = c_1 θ^{j/m'} + c_0` with a half-integral leading exponent.
pub fn generic_samples(k: &Arc<Ctx>, count: usize, seed: u64) -> Result<Vec<UpperHalfPoint>> {
    use rand::{Rng, SeedableRng};
    let m = k.m();
    if m % 2 != 0 {
        return Err(Error::Config("sample points use θ^{1/2}; m must be even".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let fq = k.fq_elements();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let e = 2 * rng.gen_range(0..2i64) + 1; // θ^{1/2} or θ^{3/2}
        let c1 = fq[rng.gen_range(1..fq.len())];
        let c0 = ThetaPoly::random_below_degree(k, 2, &mut rng);
        let lower = fq[rng.gen_range(0..fq.len())];
        let w = RamifiedSeries::monomial(k, c1, -e * m / 2)
            .add(&c0.to_series(k))
            .add(&RamifiedSeries::monomial(k, lower, m / 2));
        if let Ok(p) = UpperHalfPoint::certified(vec![w, RamifiedSeries::one(k)], 3) {
            out.push(p);
        }
    }
    Ok(out)
}
