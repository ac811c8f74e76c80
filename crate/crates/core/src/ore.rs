//! Twisted polynomials `Σ c_i τ^i` with `τ c = c^q τ`.

use std::sync::Arc;

use crate::field::Ctx;
use crate::puiseux::Puiseux;
use crate::series::{RamifiedSeries, EXACT};

/// Relative precision given to Frobenius images of exact multi-term series.
pub const EXACT_FROB_CAP: i64 = 1 << 14;

/// Coefficient ring of a twisted polynomial.
pub trait Coeff: Clone {
    fn zero(k: &Arc<Ctx>) -> Self;
    fn one(k: &Arc<Ctx>) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, k: &Arc<Ctx>, o: &Self) -> Self;
    fn neg(&self, k: &Arc<Ctx>) -> Self;
    fn mul(&self, k: &Arc<Ctx>, o: &Self) -> Self;
    /// `x^{q^n}`.
    fn frob(&self, k: &Arc<Ctx>, n: u32) -> Self;
}

impl Coeff for Puiseux {
    fn zero(_: &Arc<Ctx>) -> Self {
        Puiseux::zero()
    }
    fn one(_: &Arc<Ctx>) -> Self {
        Puiseux::constant(crate::Fe::ONE)
    }
    fn is_zero(&self) -> bool {
        Puiseux::is_zero(self)
    }
    fn add(&self, k: &Arc<Ctx>, o: &Self) -> Self {
        Puiseux::add(self, k, o)
    }
    fn neg(&self, k: &Arc<Ctx>) -> Self {
        Puiseux::neg(self, k)
    }
    fn mul(&self, k: &Arc<Ctx>, o: &Self) -> Self {
        Puiseux::mul(self, k, o)
    }
    fn frob(&self, k: &Arc<Ctx>, n: u32) -> Self {
        Puiseux::frob(self, k, n)
    }
}

impl Coeff for RamifiedSeries {
    fn zero(k: &Arc<Ctx>) -> Self {
        RamifiedSeries::zero(k)
    }
    fn one(k: &Arc<Ctx>) -> Self {
        RamifiedSeries::one(k)
    }
    fn is_zero(&self) -> bool {
        RamifiedSeries::is_zero(self)
    }
    fn add(&self, _: &Arc<Ctx>, o: &Self) -> Self {
        RamifiedSeries::add(self, o)
    }
    fn neg(&self, _: &Arc<Ctx>) -> Self {
        RamifiedSeries::neg(self)
    }
    fn mul(&self, _: &Arc<Ctx>, o: &Self) -> Self {
        RamifiedSeries::mul(self, o)
    }
    fn frob(&self, _: &Arc<Ctx>, n: u32) -> Self {
        let rel = if self.weight() <= 1 && self.is_exact() {
            EXACT
        } else {
            self.rel_prec().min(EXACT_FROB_CAP)
        };
        RamifiedSeries::frob(self, n as i64, rel).expect("forward Frobenius within budget")
    }
}

#[derive(Clone, Debug)]
pub struct TwistedPoly<C: Coeff> {
    ctx: Arc<Ctx>,
    coeffs: Vec<C>,
}

impl<C: Coeff + PartialEq> PartialEq for TwistedPoly<C> {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl<C: Coeff> TwistedPoly<C> {
    pub fn new(ctx: &Arc<Ctx>, mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { ctx: ctx.clone(), coeffs }
    }

    pub fn zero(ctx: &Arc<Ctx>) -> Self {
        Self::new(ctx, Vec::new())
    }

    pub fn constant(ctx: &Arc<Ctx>, c: C) -> Self {
        Self::new(ctx, vec![c])
    }

    /// `τ^i`.
    pub fn tau_pow(ctx: &Arc<Ctx>, i: usize) -> Self {
        let mut v = vec![C::zero(ctx); i + 1];
        v[i] = C::one(ctx);
        Self::new(ctx, v)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> C {
        self.coeffs.get(i).cloned().unwrap_or_else(|| C::zero(&self.ctx))
    }

    pub fn deg(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn ctx(&self) -> &Arc<Ctx> {
        &self.ctx
    }

    pub fn add(&self, o: &Self) -> Self {
        let k = &self.ctx;
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(k, (0..n).map(|i| self.coeff(i).add(k, &o.coeff(i))).collect())
    }

    pub fn neg(&self) -> Self {
        let k = &self.ctx;
        Self::new(k, self.coeffs.iter().map(|c| c.neg(k)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Left multiplication by a coefficient.
    pub fn scale_left(&self, c: &C) -> Self {
        let k = &self.ctx;
        Self::new(k, self.coeffs.iter().map(|x| c.mul(k, x)).collect())
    }

    /// `(Σ a_i τ^i)(Σ b_j τ^j) = Σ a_i b_j^{q^i} τ^{i+j}`.
    pub fn mul(&self, o: &Self) -> Self {
        let k = &self.ctx;
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Self::zero(k);
        }
        let mut out = vec![C::zero(k); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let t = a.mul(k, &b.frob(k, i as u32));
                out[i + j] = out[i + j].add(k, &t);
            }
        }
        Self::new(k, out)
    }
}

impl TwistedPoly<RamifiedSeries> {
    /// `Σ c_i x^{q^i}`; each Frobenius image is capped at relative precision `rel`.
    pub fn apply(&self, x: &RamifiedSeries, rel: i64) -> crate::Result<RamifiedSeries> {
        let mut acc = RamifiedSeries::zero(&self.ctx);
        let mut xi = x.truncate_rel(rel);
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                xi = xi.frob(1, rel)?;
            }
            acc = acc.add(&c.mul(&xi));
        }
        Ok(acc)
    }

    pub fn to_exact(&self) -> Option<TwistedPoly<Puiseux>> {
        let c: Option<Vec<Puiseux>> = self.coeffs.iter().map(Puiseux::from_series).collect();
        c.map(|c| TwistedPoly::new(&self.ctx, c))
    }
}

impl TwistedPoly<Puiseux> {
    pub fn to_series(&self) -> TwistedPoly<RamifiedSeries> {
        let k = &self.ctx;
        TwistedPoly::new(k, self.coeffs.iter().map(|c| c.to_series(k)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Fe, FieldParams};
    use crate::poly::ThetaPoly;

    fn theta(k: &Arc<Ctx>) -> Puiseux {
        Puiseux::from_poly(k, &ThetaPoly::theta())
    }

    #[test]
    fn tau_commutation() {
        let k = Ctx::new(FieldParams::new(3, 1, 1, 1)).unwrap();
        let tau = TwistedPoly::<Puiseux>::tau_pow(&k, 1);
        let th = TwistedPoly::constant(&k, theta(&k));
        let lhs = tau.mul(&th);
        let want = TwistedPoly::new(&k, vec![Puiseux::zero(), theta(&k).frob(&k, 1)]);
        assert_eq!(lhs, want);
    }

    #[test]
    fn carlitz_square() {
        for (p, e) in [(2, 1), (3, 1), (2, 2)] {
            let k = Ctx::new(FieldParams::new(p, e, 1, 1)).unwrap();
            let ct = TwistedPoly::new(&k, vec![theta(&k), Puiseux::constant(Fe::ONE)]);
            let sq = ct.mul(&ct);
            let th = theta(&k);
            let want = TwistedPoly::new(
                &k,
                vec![
                    th.mul(&k, &th),
                    th.frob(&k, 1).add(&k, &th),
                    Puiseux::constant(Fe::ONE),
                ],
            );
            assert_eq!(sq, want);
        }
    }

    #[test]
    fn right_identity() {
        let k = Ctx::new(FieldParams::new(2, 1, 1, 1)).unwrap();
        let f = TwistedPoly::new(&k, vec![theta(&k), Puiseux::constant(Fe::ONE), theta(&k)]);
        assert_eq!(f.mul(&TwistedPoly::tau_pow(&k, 0)), f);
    }

    #[test]
    fn action_is_composition() {
        let k = Ctx::new(FieldParams::new(3, 1, 2, 2)).unwrap();
        let f = TwistedPoly::new(&k, vec![theta(&k), Puiseux::monomial(Fe(5), -1)]).to_series();
        let g = TwistedPoly::new(&k, vec![Puiseux::constant(Fe(3)), theta(&k)]).to_series();
        let x = RamifiedSeries::new(&k, -1, vec![Fe(1), Fe(2), Fe(7)], 40);
        let lhs = f.mul(&g).apply(&x, 400).unwrap();
        let rhs = f.apply(&g.apply(&x, 400).unwrap(), 400).unwrap();
        assert!(lhs.agrees_with(&rhs));
        assert!(lhs.prec() > 20);
    }
}
