//! Drinfeld modules `φ_t = θ + g_1 τ + … + g_r τ^r` and their `F_q`-linear
//! entire series (exponential, logarithm, quasi-periodic functions).
//!
//! Precision arguments are indices (units of `1/m`). Coefficient series are
//! computed at a fixed *relative* working precision, which keeps Frobenius
//! images of size `O(rel)` regardless of `q^k`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Ctx, Fe};
use crate::ore::TwistedPoly;
use crate::poly::ThetaPoly;
use crate::puiseux::Puiseux;
use crate::series::{padd, RamifiedSeries, EXACT};

/// `(θ^{big} − θ^{small})^{-1}` for `big > small`, to relative precision `rel`.
pub fn inv_theta_diff(k: &Arc<Ctx>, big: i64, small: i64, rel: i64) -> RamifiedSeries {
    assert!(big > small);
    let m = k.m();
    let step = (big - small) * m;
    let n = rel.max(0) as usize;
    let mut dense = vec![Fe::ZERO; n];
    let mut i = 0usize;
    while i < n {
        dense[i] = Fe::ONE;
        i += step as usize;
    }
    RamifiedSeries::new(k, big * m, dense, padd(big * m, rel))
}

/// `q^k` as an `i64`, failing when it leaves the representable range.
pub fn q_pow(k: &Ctx, e: u32) -> Result<i64> {
    (k.q() as i64)
        .checked_pow(e)
        .filter(|&x| x < EXACT / 1024)
        .ok_or_else(|| Error::Budget(format!("q^{e} exceeds the index range")))
}

#[derive(Clone, Debug)]
pub struct DrinfeldModule {
    ctx: Arc<Ctx>,
    g: Vec<RamifiedSeries>,
}

impl DrinfeldModule {
    /// Module with `φ_t = θ + Σ g_i τ^i`; the top coefficient must be nonzero.
    pub fn new(ctx: &Arc<Ctx>, g: Vec<RamifiedSeries>) -> Result<Self> {
        match g.last() {
            Some(top) if !top.is_zero() => Ok(Self { ctx: ctx.clone(), g }),
            Some(_) => Err(Error::NumericallyZero("leading coefficient g_r".into())),
            None => Err(Error::Domain("rank must be at least 1".into())),
        }
    }

    pub fn carlitz(ctx: &Arc<Ctx>) -> Self {
        Self { ctx: ctx.clone(), g: vec![RamifiedSeries::one(ctx)] }
    }

    pub fn ctx(&self) -> &Arc<Ctx> {
        &self.ctx
    }

    pub fn rank(&self) -> usize {
        self.g.len()
    }

    /// `g_1, …, g_r`.
    pub fn g(&self) -> &[RamifiedSeries] {
        &self.g
    }

    /// `g_j` with `g_0 = θ` and zero beyond the rank.
    pub fn g_ext(&self, j: usize) -> RamifiedSeries {
        if j == 0 {
            RamifiedSeries::theta(&self.ctx)
        } else {
            self.g.get(j - 1).cloned().unwrap_or_else(|| RamifiedSeries::zero(&self.ctx))
        }
    }

    pub fn phi_t(&self) -> TwistedPoly<RamifiedSeries> {
        let mut c = vec![RamifiedSeries::theta(&self.ctx)];
        c.extend(self.g.iter().cloned());
        TwistedPoly::new(&self.ctx, c)
    }

    /// `φ_a` by Horner's rule in `φ_t`.
    pub fn phi_of_a(&self, a: &ThetaPoly) -> TwistedPoly<RamifiedSeries> {
        let k = &self.ctx;
        let pt = self.phi_t();
        let mut acc = TwistedPoly::zero(k);
        for &c in a.coeffs().iter().rev() {
            acc = acc.mul(&pt).add(&TwistedPoly::constant(k, RamifiedSeries::constant(k, c)));
        }
        acc
    }

    /// Exact `φ_a` when every `g_i` is exact.
    pub fn phi_of_a_exact(&self, a: &ThetaPoly) -> Option<TwistedPoly<Puiseux>> {
        let k = &self.ctx;
        let pt = self.phi_t().to_exact()?;
        let mut acc = TwistedPoly::zero(k);
        for &c in a.coeffs().iter().rev() {
            acc = acc.mul(&pt).add(&TwistedPoly::constant(k, Puiseux::constant(c)));
        }
        Some(acc)
    }

    /// Seeded module of rank `r` with `g_i ∈ A` of degree `< deg`, `g_r ≠ 0`.
    pub fn random<R: rand::Rng>(ctx: &Arc<Ctx>, r: usize, deg: usize, rng: &mut R) -> Result<Self> {
        let mut g: Vec<RamifiedSeries> =
            (0..r).map(|_| ThetaPoly::random_below_degree(ctx, deg, rng).to_series(ctx)).collect();
        while g.last().is_some_and(|x| x.is_zero()) {
            *g.last_mut().unwrap() = ThetaPoly::random_below_degree(ctx, deg, rng).to_series(ctx);
        }
        Self::new(ctx, g)
    }

    /// Worst relative valuation of the coefficients of `φ_t(exp(X)) − exp(θX)`,
    /// measured against the size of `θ^{q^n}α_n`. `φ_t ∘ exp` goes through
    /// formal composition, independently of the recursion.
    pub fn exp_functional_residual(&self, kmax: usize, rel: i64) -> Result<i64> {
        let k = &self.ctx;
        let exp = self.exp_coeffs(kmax, rel)?;
        let mut pt: Vec<RamifiedSeries> = self.phi_t().coeffs().to_vec();
        pt.resize(kmax + 1, RamifiedSeries::zero(k));
        let lhs = EntireSeries::new(k, pt).compose(&exp, rel)?;
        let mut worst = EXACT;
        for (n, (l, a)) in lhs.coeffs.iter().zip(&exp.coeffs).enumerate() {
            let rhs = a.mul(&RamifiedSeries::theta_frac(k, q_pow(k, n as u32)? * k.m()));
            if let Some(scale) = rhs.val() {
                worst = worst.min(l.sub(&rhs).val_or_prec() - scale);
            }
        }
        Ok(worst)
    }

    /// Same for `F(θX) − θF(X) − δ_t(exp(X))` with `F = F_{τ^i}`.
    pub fn quasi_functional_residual(&self, i: usize, kmax: usize, rel: i64) -> Result<i64> {
        let k = &self.ctx;
        let f = self.quasi_period_coeffs(i, kmax, rel)?;
        let exp = self.exp_coeffs(kmax, rel)?;
        let theta = RamifiedSeries::theta(k);
        let mut worst = EXACT;
        for (n, c) in f.coeffs.iter().enumerate() {
            let lhs = c.mul(&RamifiedSeries::theta_frac(k, q_pow(k, n as u32)? * k.m())).sub(&c.mul(&theta));
            // X^{q^n} coefficient of δ_t(exp(X)): exp^{q^i}, or Σ g_j exp^{q^j} when i = 0
            let mut rhs = RamifiedSeries::zero(k);
            if i == 0 {
                for j in 1..=n.min(self.rank()) {
                    rhs = rhs.add(&self.g[j - 1].mul(&exp.coeffs[n - j].frob(j as i64, rel)?));
                }
            } else if n >= i {
                rhs = exp.coeffs[n - i].frob(i as i64, rel)?;
            }
            let scale = lhs.val().into_iter().chain(rhs.val()).min();
            if let Some(scale) = scale {
                worst = worst.min(lhs.sub(&rhs).val_or_prec() - scale);
            }
        }
        Ok(worst)
    }

    /// `α_0 … α_{kmax}` with `α_k(θ^{q^k} − θ) = Σ_{j=1}^{min(k,r)} g_j α_{k−j}^{q^j}`.
    pub fn exp_coeffs(&self, kmax: usize, rel: i64) -> Result<EntireSeries> {
        let k = &self.ctx;
        let mut a: Vec<RamifiedSeries> = vec![RamifiedSeries::one(k)];
        for n in 1..=kmax {
            let mut acc = RamifiedSeries::zero(k);
            for j in 1..=n.min(self.rank()) {
                let prev = a[n - j].frob(j as i64, rel)?;
                acc = acc.add(&self.g[j - 1].mul(&prev));
            }
            let den = inv_theta_diff(k, q_pow(k, n as u32)?, 1, rel);
            a.push(acc.truncate_rel(rel).mul(&den));
        }
        Ok(EntireSeries { ctx: k.clone(), coeffs: a })
    }

    /// Formal inverse of the exponential: `β_k = −Σ_{i<k} β_i α_{k−i}^{q^i}`.
    pub fn log_coeffs(&self, kmax: usize, rel: i64) -> Result<EntireSeries> {
        let exp = self.exp_coeffs(kmax, rel)?;
        log_from_exp(&exp, rel)
    }

    /// Coefficients of the quasi-periodic function for `δ_t = τ^i`.
    pub fn quasi_period_coeffs(&self, i: usize, kmax: usize, rel: i64) -> Result<EntireSeries> {
        let k = &self.ctx;
        if i >= self.rank() {
            return Err(Error::Domain(format!(
                "biderivation index {i} outside 0..{}",
                self.rank()
            )));
        }
        let exp = self.exp_coeffs(kmax, rel)?;
        if i == 0 {
            let mut c = exp.coeffs.clone();
            c[0] = RamifiedSeries::zero(k);
            return Ok(EntireSeries { ctx: k.clone(), coeffs: c });
        }
        let mut c = vec![RamifiedSeries::zero(k)];
        for n in 1..=kmax {
            if n < i {
                c.push(RamifiedSeries::zero(k));
                continue;
            }
            let num = exp.coeffs[n - i].frob(i as i64, rel)?;
            let den = inv_theta_diff(k, q_pow(k, n as u32)?, 1, rel);
            c.push(num.mul(&den));
        }
        Ok(EntireSeries { ctx: k.clone(), coeffs: c })
    }
}

/// Formal compositional inverse of `X + Σ α_k X^{q^k}`.
pub fn log_from_exp(exp: &EntireSeries, rel: i64) -> Result<EntireSeries> {
    let k = &exp.ctx;
    let a = &exp.coeffs;
    let mut b: Vec<RamifiedSeries> = vec![RamifiedSeries::one(k)];
    for n in 1..a.len() {
        let mut acc = RamifiedSeries::zero(k);
        for (i, bi) in b.iter().enumerate() {
            let t = bi.mul(&a[n - i].frob(i as i64, rel)?);
            acc = acc.add(&t);
        }
        b.push(acc.neg().truncate_rel(rel));
    }
    Ok(EntireSeries { ctx: k.clone(), coeffs: b })
}

/// `Σ_k c_k X^{q^k}` truncated at `k = K`.
#[derive(Clone, Debug)]
pub struct EntireSeries {
    ctx: Arc<Ctx>,
    coeffs: Vec<RamifiedSeries>,
}

/// Bookkeeping attached to an evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalInfo {
    /// Number of terms actually summed.
    pub terms_used: usize,
    /// Estimated valuation (index) of the omitted tail.
    pub tail_val: i64,
}

impl EntireSeries {
    pub fn new(ctx: &Arc<Ctx>, coeffs: Vec<RamifiedSeries>) -> Self {
        Self { ctx: ctx.clone(), coeffs }
    }

    pub fn coeffs(&self) -> &[RamifiedSeries] {
        &self.coeffs
    }

    pub fn kmax(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn ctx(&self) -> &Arc<Ctx> {
        &self.ctx
    }

    /// Lower bound for the valuation of `c_k x^{q^k}`; `None` for an exactly zero coefficient.
    fn term_val(&self, kk: usize, vx: i64) -> Result<Option<i64>> {
        let c = &self.coeffs[kk];
        if c.is_zero() && c.is_exact() {
            return Ok(None);
        }
        let qk = q_pow(&self.ctx, kk as u32)?;
        Ok(Some(padd(c.val_or_prec(), vx.saturating_mul(qk))))
    }

    /// Evaluates at `x` to absolute precision at most `target`.
    ///
    /// Terms of valuation `>= target` are skipped; the omitted tail is bounded
    /// by extrapolating the last two term valuations, which must be
    /// increasing past `target`.
    pub fn eval(&self, x: &RamifiedSeries, target: i64) -> Result<(RamifiedSeries, EvalInfo)> {
        let k = &self.ctx;
        let Some(vx) = x.val() else {
            let mut zero = RamifiedSeries::zero_to(k, target.min(x.prec()));
            if !x.is_exact() {
                // only a lower bound on x is known
                let v = self
                    .term_val(0, x.prec())?
                    .unwrap_or(EXACT);
                zero = RamifiedSeries::zero_to(k, v.min(target));
            }
            return Ok((zero, EvalInfo { terms_used: 0, tail_val: EXACT }));
        };
        let mut vals = Vec::with_capacity(self.coeffs.len());
        for kk in 0..self.coeffs.len() {
            vals.push(self.term_val(kk, vx)?);
        }
        let known: Vec<(usize, i64)> =
            vals.iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v))).collect();
        let tail_val = match known.as_slice() {
            [] => EXACT,
            [.., (_, a), (_, b)] => {
                if *b <= *a || *b < target {
                    return Err(Error::TailBound(format!(
                        "term valuations {a} -> {b} do not clear target {target}; raise K_max"
                    )));
                }
                padd(*b, *b - *a)
            }
            [(_, b)] => {
                if *b < target {
                    return Err(Error::TailBound("single term below target".into()));
                }
                EXACT
            }
        };
        let mut acc = RamifiedSeries::zero_to(k, target.min(tail_val));
        let mut used = 0;
        for &(kk, v) in &known {
            if v >= target {
                continue;
            }
            used += 1;
            let need = target - v;
            let c = self.coeffs[kk].truncate_rel(need);
            let xp = x.frob(kk as i64, need)?;
            acc = acc.add(&c.mul(&xp));
        }
        Ok((acc, EvalInfo { terms_used: used, tail_val }))
    }

    /// Formal composition coefficients `(self ∘ g)_n = Σ_{i+j=n} c_i g_j^{q^i}`.
    pub fn compose(&self, g: &EntireSeries, rel: i64) -> Result<EntireSeries> {
        let k = &self.ctx;
        let n = self.coeffs.len().min(g.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for t in 0..n {
            let mut acc = RamifiedSeries::zero(k);
            for i in 0..=t {
                acc = acc.add(&self.coeffs[i].mul(&g.coeffs[t - i].frob(i as i64, rel)?));
            }
            out.push(acc);
        }
        Ok(EntireSeries { ctx: k.clone(), coeffs: out })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;

    fn ctx(p: u32, e: u32) -> Arc<Ctx> {
        Ctx::new(FieldParams::new(p, e, 1, 1)).unwrap()
    }

    fn th(k: &Arc<Ctx>, e: i64) -> RamifiedSeries {
        RamifiedSeries::theta_frac(k, e * k.m())
    }

    #[test]
    fn carlitz_first_coefficients() {
        for (p, e) in [(2, 1), (3, 1)] {
            let k = ctx(p, e);
            let q = k.q() as i64;
            let rel = 200;
            let exp = DrinfeldModule::carlitz(&k).exp_coeffs(3, rel).unwrap();
            assert_eq!(exp.coeffs()[0], RamifiedSeries::one(&k));
            // α_1 (θ^q − θ) = 1
            let d1 = th(&k, q).sub(&th(&k, 1));
            assert!(exp.coeffs()[1].mul(&d1).agrees_with(&RamifiedSeries::one(&k)));
            // α_2 (θ^{q²} − θ)(θ^{q²} − θ^q) = 1
            let d2 = th(&k, q * q).sub(&th(&k, 1)).mul(&th(&k, q * q).sub(&th(&k, q)));
            let one = exp.coeffs()[2].mul(&d2);
            assert!(one.agrees_with(&RamifiedSeries::one(&k)));
            assert!(one.prec() >= rel - 1);
        }
    }

    #[test]
    fn log_first_coefficient() {
        let k = ctx(3, 1);
        let lg = DrinfeldModule::carlitz(&k).log_coeffs(4, 100).unwrap();
        let exp = DrinfeldModule::carlitz(&k).exp_coeffs(4, 100).unwrap();
        assert!(lg.coeffs()[1].agrees_with(&exp.coeffs()[1].neg()));
        assert_eq!(lg.coeffs()[0], RamifiedSeries::one(&k));
        let id = lg.compose(&exp, 100).unwrap();
        for c in &id.coeffs()[1..] {
            assert!(c.is_zero());
        }
    }

    #[test]
    fn quasi_period_low_terms() {
        let k = ctx(2, 1);
        let g = vec![RamifiedSeries::one(&k), th(&k, 1)];
        let phi = DrinfeldModule::new(&k, g).unwrap();
        let f1 = phi.quasi_period_coeffs(1, 5, 80).unwrap();
        let d1 = inv_theta_diff(&k, 2, 1, 80);
        assert!(f1.coeffs()[1].agrees_with(&d1));
        let f0 = phi.quasi_period_coeffs(0, 5, 80).unwrap();
        let exp = phi.exp_coeffs(5, 80).unwrap();
        assert!(f0.coeffs()[0].is_zero());
        assert_eq!(f0.coeffs()[3], exp.coeffs()[3]);
        assert!(phi.quasi_period_coeffs(2, 5, 80).is_err());
    }

    #[test]
    fn phi_t2_tau_coefficient() {
        let k = ctx(3, 1);
        let g1 = RamifiedSeries::new(&k, -2, vec![Fe(1), Fe(0), Fe(2)], EXACT);
        let g2 = RamifiedSeries::one(&k);
        let phi = DrinfeldModule::new(&k, vec![g1.clone(), g2]).unwrap();
        let a = ThetaPoly::parse(&k, "t^2").unwrap();
        let f = phi.phi_of_a_exact(&a).unwrap();
        let want = g1.mul(&th(&k, 3).add(&th(&k, 1)));
        assert_eq!(f.coeffs()[1].to_series(&k), want);
        assert_eq!(f.deg(), Some(4));
    }

    #[test]
    fn exp_at_zero() {
        let k = ctx(2, 1);
        let exp = DrinfeldModule::carlitz(&k).exp_coeffs(10, 50).unwrap();
        let (v, _) = exp.eval(&RamifiedSeries::zero(&k), 50).unwrap();
        assert!(v.is_zero());
    }
}
