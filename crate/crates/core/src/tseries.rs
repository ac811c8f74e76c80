//! Truncated power series in `t` over the series field: a model of the Tate algebra.

use std::sync::Arc;

use crate::error::Result;
use crate::field::Ctx;
use crate::series::RamifiedSeries;

#[derive(Clone, Debug)]
pub struct TSeries {
    ctx: Arc<Ctx>,
    /// Coefficients of `t^0 … t^{order−1}`.
    coeffs: Vec<RamifiedSeries>,
}

impl PartialEq for TSeries {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl TSeries {
    /// Pads or truncates `coeffs` to exactly `order` entries.
    pub fn new(ctx: &Arc<Ctx>, mut coeffs: Vec<RamifiedSeries>, order: usize) -> Self {
        coeffs.truncate(order);
        while coeffs.len() < order {
            coeffs.push(RamifiedSeries::zero(ctx));
        }
        Self { ctx: ctx.clone(), coeffs }
    }

    pub fn one(ctx: &Arc<Ctx>, order: usize) -> Self {
        Self::new(ctx, vec![RamifiedSeries::one(ctx)], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, i: usize) -> &RamifiedSeries {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[RamifiedSeries] {
        &self.coeffs
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.order().min(o.order());
        let c = (0..n).map(|i| self.coeffs[i].add(&o.coeffs[i])).collect();
        Self::new(&self.ctx, c, n)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.order().min(o.order());
        let c = (0..n).map(|i| self.coeffs[i].sub(&o.coeffs[i])).collect();
        Self::new(&self.ctx, c, n)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.order().min(o.order());
        let mut out = vec![RamifiedSeries::zero(&self.ctx); n];
        for i in 0..n {
            if self.coeffs[i].is_zero() && self.coeffs[i].is_exact() {
                continue;
            }
            for j in 0..n - i {
                out[i + j] = out[i + j].add(&self.coeffs[i].mul(&o.coeffs[j]));
            }
        }
        Self::new(&self.ctx, out, n)
    }

    /// Multiplies every coefficient by a scalar.
    pub fn scale(&self, c: &RamifiedSeries) -> Self {
        let v = self.coeffs.iter().map(|x| x.mul(c)).collect();
        Self::new(&self.ctx, v, self.order())
    }

    /// Lowers every coefficient's absolute precision to at most `prec`.
    pub fn truncate_coeffs(&self, prec: i64) -> Self {
        let v = self.coeffs.iter().map(|x| x.truncate(prec)).collect();
        Self::new(&self.ctx, v, self.order())
    }

    /// `n`-fold Frobenius twist: `Σ c_i t^i ↦ Σ c_i^{q^n} t^i`.
    pub fn frobenius_twist(&self, n: i64, rel: i64) -> Result<Self> {
        let v: Result<Vec<_>> = self.coeffs.iter().map(|c| c.frob(n, rel)).collect();
        Ok(Self::new(&self.ctx, v?, self.order()))
    }

    /// Evaluates the truncated series at `t = x`.
    pub fn eval(&self, x: &RamifiedSeries) -> RamifiedSeries {
        let mut acc = RamifiedSeries::zero(&self.ctx);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    /// Smallest coefficient valuation (or precision bound), as a residual measure.
    pub fn min_val(&self) -> i64 {
        self.coeffs.iter().map(|c| c.val_or_prec()).min().unwrap_or(crate::EXACT)
    }
}
