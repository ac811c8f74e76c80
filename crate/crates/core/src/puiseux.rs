//! Exact sparse Laurent polynomials in `θ^{1/m}` over `F_{q^s}`.
//!
//! Frobenius multiplies exponents by `q`, so dense storage is hopeless for
//! exact twisted-polynomial identities; this type keeps only nonzero terms.
//! Indices follow [`RamifiedSeries`]: index `k` is `θ^{-k/m}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::field::{Ctx, Fe};
use crate::poly::ThetaPoly;
use crate::series::RamifiedSeries;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Puiseux {
    /// Sorted by index, coefficients nonzero.
    terms: Vec<(i64, Fe)>,
}

impl Puiseux {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: Fe) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: Fe, idx: i64) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Self { terms: vec![(idx, c)] }
        }
    }

    pub fn from_poly(k: &Ctx, p: &ThetaPoly) -> Self {
        let m = k.m();
        let mut terms: Vec<(i64, Fe)> = p
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, &c)| (-(i as i64) * m, c))
            .collect();
        terms.sort_by_key(|t| t.0);
        Self { terms }
    }

    /// Exact conversion; `None` if the series is not exact.
    pub fn from_series(x: &RamifiedSeries) -> Option<Self> {
        x.is_exact().then(|| Self { terms: x.terms().collect() })
    }

    pub fn to_series(&self, k: &Arc<Ctx>) -> RamifiedSeries {
        let mut acc = RamifiedSeries::zero(k);
        for &(i, c) in &self.terms {
            acc = acc.add(&RamifiedSeries::monomial(k, c, i));
        }
        acc
    }

    pub fn terms(&self) -> &[(i64, Fe)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn collect(k: &Ctx, map: BTreeMap<i64, Fe>) -> Self {
        let _ = k;
        Self { terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn add(&self, k: &Ctx, o: &Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < o.terms.len() {
            let a = self.terms.get(i);
            let b = o.terms.get(j);
            match (a, b) {
                (Some(&(ia, ca)), Some(&(ib, cb))) if ia == ib => {
                    let c = k.add(ca, cb);
                    if !c.is_zero() {
                        out.push((ia, c));
                    }
                    i += 1;
                    j += 1;
                }
                (Some(&(ia, ca)), Some(&(ib, _))) if ia < ib => {
                    out.push((ia, ca));
                    i += 1;
                }
                (Some(&t), None) => {
                    out.push(t);
                    i += 1;
                }
                (_, Some(&t)) => {
                    out.push(t);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Self { terms: out }
    }

    pub fn neg(&self, k: &Ctx) -> Self {
        Self { terms: self.terms.iter().map(|&(i, c)| (i, k.neg(c))).collect() }
    }

    pub fn mul(&self, k: &Ctx, o: &Self) -> Self {
        let mut map = BTreeMap::new();
        for &(ia, ca) in &self.terms {
            for &(ib, cb) in &o.terms {
                let e = map.entry(ia + ib).or_insert(Fe::ZERO);
                *e = k.add(*e, k.mul(ca, cb));
            }
        }
        Self::collect(k, map)
    }

    /// `x^{q^n}` for `n ≥ 0`.
    pub fn frob(&self, k: &Ctx, n: u32) -> Self {
        let qn = (k.q() as i64).pow(n);
        Self {
            terms: self
                .terms
                .iter()
                .map(|&(i, c)| (i * qn, k.frob_n(c, n as i64)))
                .collect(),
        }
    }
}
