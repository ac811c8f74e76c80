//! Truncated Laurent series in `π = θ^{-1/m}` over `F_{q^s}`.
//!
//! A series is stored densely by *index*: index `k` carries the coefficient
//! of `π^k = θ^{-k/m}`, so the valuation of `θ` is index `-m` and
//! `|x|_∞ = q^{-val(x)/m}`. Every series has an absolute precision `prec`
//! (an index): coefficients at indices `>= prec` are unknown. Exact values use
//! the sentinel [`EXACT`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Ctx, Fe};

/// Precision sentinel for exactly known series.
pub const EXACT: i64 = 1 << 61;

/// Upper bound on any dense coefficient vector.
pub const MAX_DENSE_LEN: i64 = 1 << 24;

#[inline]
pub(crate) fn clamp(p: i64) -> i64 {
    p.min(EXACT)
}

#[inline]
pub(crate) fn padd(a: i64, b: i64) -> i64 {
    if a >= EXACT || b >= EXACT {
        EXACT
    } else {
        clamp(a.saturating_add(b))
    }
}

#[derive(Clone)]
pub struct RamifiedSeries {
    ctx: Arc<Ctx>,
    start: i64,
    coeffs: Vec<Fe>,
    prec: i64,
}

impl PartialEq for RamifiedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.prec == other.prec && self.start == other.start && self.coeffs == other.coeffs
    }
}
impl Eq for RamifiedSeries {}

impl RamifiedSeries {
    /// Builds a series from a raw coefficient vector beginning at `start`;
    /// coefficients at or beyond `prec` are discarded.
    pub fn new(ctx: &Arc<Ctx>, start: i64, mut coeffs: Vec<Fe>, prec: i64) -> Self {
        let prec = clamp(prec);
        let keep = (prec - start).clamp(0, coeffs.len() as i64) as usize;
        coeffs.truncate(keep);
        let lead = coeffs.iter().position(|c| !c.is_zero());
        let (start, coeffs) = match lead {
            None => (0, Vec::new()),
            Some(i) => {
                let trail = coeffs.iter().rposition(|c| !c.is_zero()).unwrap();
                (start + i as i64, coeffs[i..=trail].to_vec())
            }
        };
        Self { ctx: ctx.clone(), start, coeffs, prec }
    }

    /// Exact zero.
    pub fn zero(ctx: &Arc<Ctx>) -> Self {
        Self::zero_to(ctx, EXACT)
    }

    /// Zero known up to (excluding) index `prec`.
    pub fn zero_to(ctx: &Arc<Ctx>, prec: i64) -> Self {
        Self { ctx: ctx.clone(), start: 0, coeffs: Vec::new(), prec: clamp(prec) }
    }

    pub fn one(ctx: &Arc<Ctx>) -> Self {
        Self::constant(ctx, Fe::ONE)
    }

    pub fn constant(ctx: &Arc<Ctx>, c: Fe) -> Self {
        Self::monomial(ctx, c, 0)
    }

    /// Exact `c·π^idx`.
    pub fn monomial(ctx: &Arc<Ctx>, c: Fe, idx: i64) -> Self {
        Self::new(ctx, idx, vec![c], EXACT)
    }

    /// Exact `θ^{k/m}`.
    pub fn theta_frac(ctx: &Arc<Ctx>, k: i64) -> Self {
        Self::monomial(ctx, Fe::ONE, -k)
    }

    /// Exact `θ`.
    pub fn theta(ctx: &Arc<Ctx>) -> Self {
        Self::theta_frac(ctx, ctx.m())
    }

    /// Exact polynomial `Σ c_i θ^i`.
    pub fn from_theta_coeffs(ctx: &Arc<Ctx>, c: &[Fe]) -> Self {
        if c.is_empty() {
            return Self::zero(ctx);
        }
        let m = ctx.m();
        let d = c.len() as i64 - 1;
        let mut dense = vec![Fe::ZERO; (d * m + 1) as usize];
        for (i, &ci) in c.iter().enumerate() {
            dense[((d - i as i64) * m) as usize] = ci;
        }
        Self::new(ctx, -d * m, dense, EXACT)
    }

    pub fn ctx(&self) -> &Arc<Ctx> {
        &self.ctx
    }

    /// Absolute precision index.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec >= EXACT
    }

    /// Index of the first nonzero known coefficient.
    pub fn val(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.start)
        }
    }

    /// Valuation, or the precision (a lower bound) when numerically zero.
    pub fn val_or_prec(&self) -> i64 {
        self.val().unwrap_or(self.prec)
    }

    /// Numerically zero: every known coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Relative precision `prec - val` (only meaningful when nonzero).
    pub fn rel_prec(&self) -> i64 {
        if self.is_exact() {
            EXACT
        } else {
            self.prec - self.val_or_prec()
        }
    }

    pub fn lead(&self) -> Option<Fe> {
        self.coeffs.first().copied()
    }

    /// Coefficient at index `k` (zero outside the stored range, including
    /// unknown positions).
    pub fn coeff(&self, k: i64) -> Fe {
        let i = k - self.start;
        if i < 0 || i >= self.coeffs.len() as i64 {
            Fe::ZERO
        } else {
            self.coeffs[i as usize]
        }
    }

    /// Nonzero terms `(index, coefficient)` in increasing index order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Fe)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, &c)| (self.start + i as i64, c))
    }

    /// Number of nonzero known terms.
    pub fn weight(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    /// Lowers the absolute precision to at most `prec`.
    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        Self::new(&self.ctx, self.start, self.coeffs.clone(), prec)
    }

    /// Same digits, with the precision declared to be `prec` (may raise it).
    pub(crate) fn reinterpret_prec(&self, prec: i64) -> Self {
        Self::new(&self.ctx, self.start, self.coeffs.clone(), prec)
    }

    /// Keeps at most `rel` indices past the valuation.
    pub fn truncate_rel(&self, rel: i64) -> Self {
        match self.val() {
            None => self.clone(),
            Some(v) => self.truncate(padd(v, rel)),
        }
    }

    fn same_ctx(&self, other: &Self) {
        debug_assert!(Arc::ptr_eq(&self.ctx, &other.ctx), "mixed contexts");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_ctx(other);
        let prec = self.prec.min(other.prec);
        if other.is_zero() {
            return self.truncate(prec);
        }
        if self.is_zero() {
            return other.truncate(prec);
        }
        let lo = self.start.min(other.start);
        let hi = (self.start + self.coeffs.len() as i64)
            .max(other.start + other.coeffs.len() as i64)
            .min(prec);
        if hi <= lo {
            return Self::zero_to(&self.ctx, prec);
        }
        let k = &self.ctx;
        let mut out = vec![Fe::ZERO; (hi - lo) as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let j = self.start + i as i64 - lo;
            if j < out.len() as i64 {
                out[j as usize] = c;
            }
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            let j = other.start + i as i64 - lo;
            if j < out.len() as i64 && !c.is_zero() {
                out[j as usize] = k.add(out[j as usize], c);
            }
        }
        Self::new(k, lo, out, prec)
    }

    pub fn neg(&self) -> Self {
        let k = &self.ctx;
        Self {
            ctx: k.clone(),
            start: self.start,
            coeffs: self.coeffs.iter().map(|&c| k.neg(c)).collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiplies by a field constant.
    pub fn scale(&self, c: Fe) -> Self {
        if c.is_zero() {
            return Self::zero_to(&self.ctx, self.prec);
        }
        let k = &self.ctx;
        Self {
            ctx: k.clone(),
            start: self.start,
            coeffs: self.coeffs.iter().map(|&x| k.mul(x, c)).collect(),
            prec: self.prec,
        }
    }

    /// Multiplies by `π^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            ctx: self.ctx.clone(),
            start: if self.coeffs.is_empty() { 0 } else { self.start + k },
            coeffs: self.coeffs.clone(),
            prec: padd(self.prec, k),
        }
    }

    /// Product with precision `min(π_a + v_b, π_b + v_a)`.
    pub fn mul(&self, other: &Self) -> Self {
        self.same_ctx(other);
        let va = self.val_or_prec();
        let vb = other.val_or_prec();
        let prec = padd(self.prec, vb).min(padd(other.prec, va));
        if self.is_zero() || other.is_zero() {
            return Self::zero_to(&self.ctx, prec);
        }
        let k = &self.ctx;
        // only indices below prec are needed
        let la = (self.coeffs.len() as i64).min(prec.saturating_sub(va + vb)).max(0) as usize;
        let lb = (other.coeffs.len() as i64).min(prec.saturating_sub(va + vb)).max(0) as usize;
        let len = (la + lb).saturating_sub(1).min((prec.saturating_sub(va + vb)).max(0) as usize);
        if len == 0 {
            return Self::zero_to(k, prec);
        }
        let mut out = vec![Fe::ZERO; len];
        let a = &self.coeffs[..la];
        let b = &other.coeffs[..lb];
        if k.p() == 2 {
            // characteristic 2: log tables plus xor accumulation
            let logb: Vec<Option<u32>> = b.iter().map(|&c| k.log(c)).collect();
            for (i, &ai) in a.iter().enumerate() {
                let Some(la) = k.log(ai) else { continue };
                let lim = (len - i).min(lb);
                for (j, lbj) in logb[..lim].iter().enumerate() {
                    if let Some(l) = lbj {
                        out[i + j].0 ^= k.exp(la + l).0;
                    }
                }
            }
        } else {
            let logb: Vec<Option<u32>> = b.iter().map(|&c| k.log(c)).collect();
            for (i, &ai) in a.iter().enumerate() {
                let Some(la) = k.log(ai) else { continue };
                let lim = (len.saturating_sub(i)).min(lb);
                for (j, lbj) in logb[..lim].iter().enumerate() {
                    if let Some(l) = lbj {
                        out[i + j] = k.add(out[i + j], k.exp(la + l));
                    }
                }
            }
        }
        Self::new(k, va + vb, out, prec)
    }

    /// Inverse with relative precision `min(prec - val, rel_cap)`.
    ///
    /// Exact inputs with more than one term need a finite `rel_cap`.
    pub fn inv_rel(&self, rel_cap: i64) -> Result<Self> {
        let Some(v) = self.val() else {
            return Err(Error::NumericallyZero("inverse of a zero series".into()));
        };
        let k = &self.ctx;
        let rel = self.rel_prec().min(rel_cap);
        if self.coeffs.len() == 1 && rel >= EXACT {
            let c = k.inv(self.coeffs[0])?;
            return Ok(Self::monomial(k, c, -v));
        }
        if rel >= EXACT || rel > MAX_DENSE_LEN {
            return Err(Error::Precision(
                "inverse requires a finite relative precision".into(),
            ));
        }
        let n = rel.max(0) as usize;
        let a0inv = k.inv(self.coeffs[0])?;
        // normalised input a/a0 = 1 + ...
        let a: Vec<Fe> = self.coeffs.iter().take(n).map(|&c| k.mul(c, a0inv)).collect();
        let nz: Vec<(usize, u32)> = a
            .iter()
            .enumerate()
            .skip(1)
            .filter_map(|(i, &c)| k.log(c).map(|l| (i, l)))
            .collect();
        let mut b = vec![Fe::ZERO; n];
        if n > 0 {
            b[0] = Fe::ONE;
        }
        for t in 1..n {
            let mut acc = Fe::ZERO;
            for &(i, l) in &nz {
                if i > t {
                    break;
                }
                if let Some(lb) = k.log(b[t - i]) {
                    acc = k.add(acc, k.exp(l + lb));
                }
            }
            b[t] = k.neg(acc);
        }
        let b: Vec<Fe> = b.into_iter().map(|c| k.mul(c, a0inv)).collect();
        Ok(Self::new(k, -v, b, -v + rel))
    }

    /// `self / other` with the quotient's relative precision capped by `rel_cap`.
    pub fn div_rel(&self, other: &Self, rel_cap: i64) -> Result<Self> {
        Ok(self.mul(&other.inv_rel(rel_cap)?))
    }

    /// `x ↦ x^{q^n}` for `n ≥ 0`, truncated to relative precision `rel`
    /// (pass [`EXACT`] for no cap). For `n < 0` every term index must be
    /// divisible by `q^{|n|}`.
    pub fn frob(&self, n: i64, rel: i64) -> Result<Self> {
        let k = &self.ctx;
        if n == 0 {
            return Ok(self.truncate_rel(rel));
        }
        let q = k.q() as i64;
        let qn = q
            .checked_pow(n.unsigned_abs() as u32)
            .filter(|&x| x < EXACT)
            .ok_or_else(|| Error::Precision("Frobenius power too large".into()))?;
        if n > 0 {
            let new_prec = if self.is_exact() {
                EXACT
            } else {
                clamp(self.prec.saturating_mul(qn))
            };
            let Some(v) = self.val() else {
                return Ok(Self::zero_to(k, new_prec));
            };
            let new_v = v.saturating_mul(qn);
            let prec = new_prec.min(padd(new_v, rel));
            let last = self.start + self.coeffs.len() as i64 - 1;
            let top = (last.saturating_mul(qn) + 1).min(prec);
            if top - new_v > MAX_DENSE_LEN {
                return Err(Error::Budget("Frobenius image too long".into()));
            }
            let mut out = vec![Fe::ZERO; (top - new_v).max(0) as usize];
            for (i, c) in self.terms() {
                let j = i * qn - new_v;
                if j < out.len() as i64 {
                    out[j as usize] = k.frob_n(c, n);
                } else {
                    break;
                }
            }
            Ok(Self::new(k, new_v, out, prec))
        } else {
            let new_prec = if self.is_exact() {
                EXACT
            } else {
                self.prec.div_euclid(qn) + if self.prec.rem_euclid(qn) == 0 { 0 } else { 1 }
            };
            let Some(v) = self.val() else {
                return Ok(Self::zero_to(k, new_prec));
            };
            if v.rem_euclid(qn) != 0 {
                return Err(Error::Domain("inverse Frobenius leaves the field".into()));
            }
            let new_v = v / qn;
            let prec = new_prec.min(padd(new_v, rel));
            let mut out = Vec::with_capacity(self.coeffs.len() / qn as usize + 1);
            for (i, c) in self.terms() {
                if i.rem_euclid(qn) != 0 {
                    return Err(Error::Domain("inverse Frobenius leaves the field".into()));
                }
                let j = (i / qn - new_v) as usize;
                if j >= out.len() {
                    out.resize(j + 1, Fe::ZERO);
                }
                out[j] = k.frob_n(c, n);
            }
            Ok(Self::new(k, new_v, out, prec))
        }
    }

    /// `x^e` for `e ≥ 0`, computed at relative precision `rel`.
    pub fn pow(&self, mut e: u64, rel: i64) -> Self {
        let mut base = self.truncate_rel(rel);
        let mut acc = Self::one(&self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).truncate_rel(rel);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).truncate_rel(rel);
            }
        }
        acc
    }

    /// The `n`-th root with leading coefficient the least-encoding root of
    /// the leading coefficient; requires `gcd(n, p) = 1` and `n | val`.
    pub fn nth_root(&self, n: u64, rel: i64) -> Result<Self> {
        let k = &self.ctx;
        if n == 0 || n % k.p() as u64 == 0 {
            return Err(Error::Domain(format!("{n}-th roots are not separable here")));
        }
        let Some(v) = self.val() else {
            return Err(Error::NumericallyZero("root of zero".into()));
        };
        if v.rem_euclid(n as i64) != 0 {
            return Err(Error::Domain(format!(
                "{n}-th root needs more ramification than m = {}",
                k.m()
            )));
        }
        let lead = self.coeffs[0];
        let c = (1..k.size() as u16)
            .map(Fe)
            .find(|&z| k.pow_u64(z, n) == lead)
            .ok_or_else(|| Error::Domain("leading coefficient has no root in F_{q^s}".into()))?;
        let rel = self.rel_prec().min(rel);
        if rel >= EXACT && self.coeffs.len() == 1 {
            return Ok(Self::monomial(k, c, v / n as i64));
        }
        if rel >= EXACT {
            return Err(Error::Precision("root requires a finite precision".into()));
        }
        // unit part z = x / (lead π^v) = 1 + ...
        let z = self
            .shift(-v)
            .scale(k.inv(lead)?)
            .truncate(rel);
        let n_fe = k.from_int((n % k.p() as u64) as i64);
        let n_inv = k.inv(n_fe)?;
        let mut r = Self::one(k);
        let mut have = 1i64;
        while have < rel {
            have = (2 * have).min(rel);
            // Newton lift: treat the current digits as exact
            let rp = r.reinterpret_prec(have);
            let rn1 = rp.pow(n - 1, have);
            let resid = rn1.mul(&rp).truncate(have).sub(&z.truncate(have));
            let corr = resid.mul(&rn1.inv_rel(have)?).scale(n_inv);
            r = rp.sub(&corr).truncate(have);
        }
        Ok(r.truncate(rel).scale(c).shift(v / n as i64))
    }

    /// True when both agree on every index below `min(prec)`.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    fn fmt_term(&self, f: &mut fmt::Formatter<'_>, idx: i64, c: Fe) -> fmt::Result {
        let e = crate::field::fmt_rational(-idx, self.ctx.m());
        if c == Fe::ONE {
            write!(f, "θ^{e}")
        } else {
            write!(f, "[{}]θ^{e}", c.0)
        }
    }
}

impl fmt::Debug for RamifiedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for RamifiedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (shown, (i, c)) in self.terms().enumerate() {
            if shown == 6 {
                write!(f, " + …")?;
                break;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            self.fmt_term(f, i, c)?;
        }
        if first {
            write!(f, "0")?;
        }
        if !self.is_exact() {
            write!(f, " + O(θ^{})", crate::field::fmt_rational(-self.prec, self.ctx.m()))?;
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&RamifiedSeries> for &RamifiedSeries {
            type Output = RamifiedSeries;
            fn $m(self, rhs: &RamifiedSeries) -> RamifiedSeries {
                RamifiedSeries::$m(self, rhs)
            }
        }
    };
}
binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Neg for &RamifiedSeries {
    type Output = RamifiedSeries;
    fn neg(self) -> RamifiedSeries {
        RamifiedSeries::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;

    fn ctx(p: u32, e: u32, s: u32, m: u32) -> Arc<Ctx> {
        Ctx::new(FieldParams::new(p, e, s, m)).unwrap()
    }

    #[test]
    fn geometric_series() {
        let k = ctx(3, 1, 1, 1);
        let x = RamifiedSeries::one(&k).sub(&RamifiedSeries::monomial(&k, Fe::ONE, 1));
        let inv = x.inv_rel(30).unwrap();
        assert_eq!(inv.prec(), 30);
        for i in 0..30 {
            assert_eq!(inv.coeff(i), Fe::ONE);
        }
    }

    #[test]
    fn half_powers_multiply() {
        let k = ctx(3, 1, 2, 2);
        let h = RamifiedSeries::theta_frac(&k, 1);
        assert_eq!(&h * &h, RamifiedSeries::theta(&k));
    }

    #[test]
    fn difference_of_squares() {
        let k = ctx(3, 1, 1, 1);
        let one = Fe::ONE;
        let m1 = k.neg(one);
        let a = RamifiedSeries::from_theta_coeffs(&k, &[one, one]);
        let b = RamifiedSeries::from_theta_coeffs(&k, &[m1, one]);
        let want = RamifiedSeries::from_theta_coeffs(&k, &[m1, Fe::ZERO, one]);
        assert_eq!(&a * &b, want);
    }

    #[test]
    fn product_precision_rule() {
        let k = ctx(2, 1, 1, 1);
        // a = θ + O(θ^{-5}), b = θ^{-2} + O(θ^{-10})
        let a = RamifiedSeries::monomial(&k, Fe::ONE, -1).truncate(5);
        let b = RamifiedSeries::monomial(&k, Fe::ONE, 2).truncate(10);
        let c = &a * &b;
        assert_eq!(c.prec(), (5 + 2).min(10 - 1));
        assert_eq!(c.val(), Some(1));
    }

    #[test]
    fn frobenius_round_trip() {
        let k = ctx(3, 1, 2, 2);
        let x = RamifiedSeries::new(&k, -2, vec![Fe(3), Fe(0), Fe(5), Fe(7)], 20);
        let y = x.frob(1, EXACT).unwrap();
        assert_eq!(y.prec(), 60);
        assert_eq!(y.val(), Some(-6));
        let back = y.frob(-1, EXACT).unwrap();
        assert_eq!(back, x);
        assert!(x.frob(-1, EXACT).is_err());
    }

    #[test]
    fn frobenius_is_power() {
        let k = ctx(2, 2, 1, 1);
        let x = RamifiedSeries::new(&k, -1, vec![Fe(2), Fe(3), Fe(1)], 12);
        let direct = x.pow(4, EXACT);
        assert!(direct.agrees_with(&x.frob(1, EXACT).unwrap()));
    }

    #[test]
    fn square_root_of_unit() {
        let k = ctx(3, 1, 1, 2);
        let theta_plus_one = RamifiedSeries::from_theta_coeffs(&k, &[Fe::ONE, Fe::ONE]);
        let r = theta_plus_one.nth_root(2, 40).unwrap();
        assert_eq!(r.val(), Some(-1));
        let sq = &r * &r;
        assert!(sq.agrees_with(&theta_plus_one));
        assert!(sq.prec() >= 38, "{} {}", r.prec(), sq.prec());
    }

    #[test]
    fn zero_precision_is_lower_bound() {
        let k = ctx(2, 1, 1, 1);
        let z = RamifiedSeries::zero_to(&k, 7);
        let x = RamifiedSeries::monomial(&k, Fe::ONE, -3);
        let p = &z * &x;
        assert!(p.is_zero());
        assert_eq!(p.prec(), 4);
    }
}
