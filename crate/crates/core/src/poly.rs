//! Dense polynomials in `θ` (elements of `A = F_q[θ]`, or of `F_{q^s}[θ]`).

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Ctx, Fe};
use crate::series::RamifiedSeries;

/// Coefficients are stored low degree first with no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThetaPoly {
    coeffs: Vec<Fe>,
}

impl Serialize for Fe {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u16(self.0)
    }
}

impl<'de> Deserialize<'de> for Fe {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        u16::deserialize(d).map(Fe)
    }
}

impl ThetaPoly {
    pub fn new(mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Fe) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Fe::ONE)
    }

    /// `θ^d`.
    pub fn monomial(c: Fe, d: usize) -> Self {
        let mut v = vec![Fe::ZERO; d + 1];
        v[d] = c;
        Self::new(v)
    }

    pub fn theta() -> Self {
        Self::monomial(Fe::ONE, 1)
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.coeffs.get(i).copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Fe {
        self.coeffs.last().copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == Fe::ONE
    }

    /// All coefficients lie in `F_q`.
    pub fn is_over_fq(&self, k: &Ctx) -> bool {
        self.coeffs.iter().all(|&c| k.in_fq(c))
    }

    pub fn add(&self, k: &Ctx, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|i| k.add(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn neg(&self, k: &Ctx) -> Self {
        Self::new(self.coeffs.iter().map(|&c| k.neg(c)).collect())
    }

    pub fn sub(&self, k: &Ctx, o: &Self) -> Self {
        self.add(k, &o.neg(k))
    }

    pub fn scale(&self, k: &Ctx, c: Fe) -> Self {
        Self::new(self.coeffs.iter().map(|&x| k.mul(x, c)).collect())
    }

    pub fn mul(&self, k: &Ctx, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Fe::ZERO; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                out[i + j] = k.add(out[i + j], k.mul(a, b));
            }
        }
        Self::new(out)
    }

    /// Euclidean division by a nonzero divisor.
    pub fn divrem(&self, k: &Ctx, d: &Self) -> Result<(Self, Self)> {
        let dd = d.deg().ok_or(Error::DivisionByZero)?;
        let lead_inv = k.inv(d.lead())?;
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut qt = vec![Fe::ZERO; r.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = k.mul(r[i], lead_inv);
            if c.is_zero() {
                continue;
            }
            qt[i - dd] = c;
            for j in 0..=dd {
                r[i - dd + j] = k.sub(r[i - dd + j], k.mul(c, d.coeffs[j]));
            }
        }
        Ok((Self::new(qt), Self::new(r)))
    }

    pub fn rem(&self, k: &Ctx, d: &Self) -> Result<Self> {
        Ok(self.divrem(k, d)?.1)
    }

    /// Exact image in the series field.
    pub fn to_series(&self, k: &Arc<Ctx>) -> RamifiedSeries {
        RamifiedSeries::from_theta_coeffs(k, &self.coeffs)
    }

    /// Evaluates `Σ c_i x^i` at a series by Horner's rule.
    pub fn eval(&self, k: &Arc<Ctx>, x: &RamifiedSeries) -> RamifiedSeries {
        let mut acc = RamifiedSeries::zero(k);
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(&RamifiedSeries::constant(k, c));
        }
        acc
    }

    /// Every polynomial over `F_q` of degree `< d`, in order of the base-q
    /// digit encoding (zero first).
    pub fn all_below_degree(k: &Ctx, d: usize) -> Vec<ThetaPoly> {
        let fq = k.fq_elements();
        let q = fq.len();
        let total = q.pow(d as u32);
        (0..total)
            .map(|mut idx| {
                let mut c = Vec::with_capacity(d);
                for _ in 0..d {
                    c.push(fq[idx % q]);
                    idx /= q;
                }
                ThetaPoly::new(c)
            })
            .collect()
    }

    /// Uniformly random polynomial over `F_q` of degree `< d`.
    pub fn random_below_degree<R: Rng>(k: &Ctx, d: usize, rng: &mut R) -> Self {
        let fq = k.fq_elements();
        Self::new((0..d).map(|_| fq[rng.gen_range(0..fq.len())]).collect())
    }

    /// Parses `θ`-polynomials such as `θ^2+2θ+1`, `t`, `1`, `theta-1`.
    /// Coefficients are integers taken modulo `p`.
    pub fn parse(k: &Ctx, text: &str) -> Result<Self> {
        let norm = text.replace("theta", "θ").replace('t', "θ").replace(' ', "");
        if norm.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut out = ThetaPoly::zero();
        let mut terms = Vec::new();
        let mut cur = String::new();
        for ch in norm.chars() {
            if (ch == '+' || ch == '-') && !cur.is_empty() && !cur.ends_with('^') {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        for term in terms {
            let (sign, body) = match term.strip_prefix('-') {
                Some(b) => (-1i64, b.to_string()),
                None => (1, term.trim_start_matches('+').to_string()),
            };
            let bad = || Error::Parse(format!("bad polynomial term `{term}`"));
            let (coef, deg) = match body.split_once('θ') {
                None => (body.parse::<i64>().map_err(|_| bad())?, 0usize),
                Some((c, e)) => {
                    let c = if c.is_empty() { 1 } else { c.trim_end_matches('*').parse().map_err(|_| bad())? };
                    let e = if e.is_empty() {
                        1
                    } else {
                        e.strip_prefix('^').ok_or_else(bad)?.parse().map_err(|_| bad())?
                    };
                    (c, e)
                }
            };
            out = out.add(k, &ThetaPoly::monomial(k.from_int(sign * coef), deg));
        }
        Ok(out)
    }
}
