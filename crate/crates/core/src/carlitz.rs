//! The Carlitz period, generalized periods `π̃_y`, and Anderson–Thakur's `Ω(t)`.

use std::sync::Arc;

use crate::drinfeld::q_pow;
use crate::error::{Error, Result};
use crate::field::{Ctx, Fe};
use crate::series::{padd, RamifiedSeries, EXACT};
use crate::tseries::TSeries;

/// The fixed root `(−θ)^{1/(q−1)} = ζ θ^{1/(q−1)}`.
pub fn neg_theta_root(k: &Arc<Ctx>) -> Result<RamifiedSeries> {
    let q1 = k.q() as i64 - 1;
    if k.m() % q1 != 0 {
        return Err(Error::Config(format!(
            "ramification m = {} must be divisible by q - 1 = {q1}",
            k.m()
        )));
    }
    let zeta = k
        .zeta()
        .ok_or_else(|| Error::Config("no (q-1)-st root of -1 in F_{q^s}; increase s".into()))?;
    Ok(RamifiedSeries::monomial(k, zeta, -k.m() / q1))
}

/// `∏_{i≥1} (1 − y^{1−q^i})^{-1}` to absolute precision `rel` (the product
/// is a one-unit), for `|y| > 1`.
fn period_product(k: &Arc<Ctx>, y: &RamifiedSeries, rel: i64) -> Result<RamifiedSeries> {
    let vy = y.val().ok_or_else(|| Error::NumericallyZero("period base".into()))?;
    if vy >= 0 {
        return Err(Error::Domain("period base must have |y| > 1".into()));
    }
    let yinv = y.inv_rel(rel)?;
    let mut acc = RamifiedSeries::one(k).truncate(rel);
    let mut i = 1u32;
    loop {
        let qi = q_pow(k, i)?;
        // val of y^{1-q^i} is -vy (q^i - 1) > 0
        if (-vy).saturating_mul(qi - 1) >= rel {
            break;
        }
        let f = yinv.frob(i as i64, rel)?.mul(y).truncate(rel);
        let factor = RamifiedSeries::one(k).sub(&f).truncate(rel);
        acc = acc.mul(&factor.inv_rel(rel)?).truncate(rel);
        i += 1;
    }
    Ok(acc)
}

/// `π̃ = −(−θ)^{q/(q−1)} ∏_{i≥1}(1 − θ^{1−q^i})^{-1}` to absolute precision `prec`.
pub fn carlitz_period(k: &Arc<Ctx>, prec: i64) -> Result<RamifiedSeries> {
    let root = neg_theta_root(k)?;
    let lead = root.frob(1, EXACT)?.neg();
    let rel = prec - lead.val().unwrap();
    if rel <= 0 {
        return Ok(RamifiedSeries::zero_to(k, prec));
    }
    let prod = period_product(k, &RamifiedSeries::theta(k), rel)?;
    Ok(lead.mul(&prod))
}

/// Generalized period `π̃_y = −(−y)^{q/(q−1)} ∏_{i≥1}(1 − y^{1−q^i})^{-1}` of
/// the rank-one module `ψ_y = y + τ` over `F_q[y]`. The root `(−y)^{1/(q−1)}`
/// uses the same `ζ` as the Carlitz case.
pub fn generalized_period(k: &Arc<Ctx>, y: &RamifiedSeries, prec: i64) -> Result<RamifiedSeries> {
    let q1 = k.q() - 1;
    let zeta = k
        .zeta()
        .ok_or_else(|| Error::Config("no (q-1)-st root of -1 in F_{q^s}".into()))?;
    let vy = y.val().ok_or_else(|| Error::NumericallyZero("period base".into()))?;
    let vlead = vy * k.q() as i64;
    if vlead.rem_euclid(q1 as i64) != 0 {
        return Err(Error::Domain("(-y)^{q/(q-1)} needs more ramification".into()));
    }
    let rel = prec - vlead / q1 as i64;
    if rel <= 0 {
        return Ok(RamifiedSeries::zero_to(k, prec));
    }
    let root = if q1 == 1 {
        y.neg().truncate_rel(rel)
    } else {
        y.truncate_rel(rel).nth_root(q1, rel)?.scale(zeta)
    };
    // (−y)^{q/(q−1)} = (−y)·(−y)^{1/(q−1)}
    let lead = y.neg().mul(&root).neg();
    let prod = period_product(k, y, rel)?;
    Ok(lead.mul(&prod).truncate(prec))
}

/// `Ω(t) = (−θ)^{−q/(q−1)} ∏_{i≥1} (1 − t/θ^{q^i})` through `t^{t_order−1}`.
pub fn omega_series(k: &Arc<Ctx>, t_order: usize, prec: i64) -> Result<TSeries> {
    let root = neg_theta_root(k)?;
    let head = root.frob(1, EXACT)?.inv_rel(EXACT)?;
    let vh = head.val().unwrap();
    let inner = prec - vh;
    let mut acc = TSeries::one(k, t_order);
    let mut i = 1u32;
    loop {
        let qi = q_pow(k, i)?;
        if qi.saturating_mul(k.m()) >= inner {
            break;
        }
        let c = RamifiedSeries::monomial(k, k.neg(Fe::ONE), qi * k.m());
        let factor = TSeries::new(k, vec![RamifiedSeries::one(k), c], t_order);
        acc = acc.mul(&factor);
        i += 1;
    }
    let acc = acc.truncate_coeffs(inner);
    Ok(acc.scale(&head).truncate_coeffs(padd(inner, vh)))
}

/// `Ω(θ)` by direct evaluation of the product at `t = θ`.
pub fn omega_at_theta(k: &Arc<Ctx>, prec: i64) -> Result<RamifiedSeries> {
    let root = neg_theta_root(k)?;
    let head = root.frob(1, EXACT)?.inv_rel(EXACT)?;
    let rel = prec - head.val().unwrap();
    let m = k.m();
    let mut acc = RamifiedSeries::one(k).truncate(rel);
    let mut i = 1u32;
    loop {
        let qi = q_pow(k, i)?;
        if (qi - 1).saturating_mul(m) >= rel {
            break;
        }
        let f = RamifiedSeries::one(k).sub(&RamifiedSeries::monomial(k, Fe::ONE, (qi - 1) * m));
        acc = acc.mul(&f).truncate(rel);
        i += 1;
    }
    Ok(head.mul(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;

    #[test]
    fn carlitz_period_q2_leading_term() {
        let k = Ctx::new(FieldParams::new(2, 1, 1, 1)).unwrap();
        let pi = carlitz_period(&k, 40).unwrap();
        assert_eq!(pi.val(), Some(-2));
        assert_eq!(pi.lead(), Some(Fe::ONE));
        assert_eq!(pi.prec(), 40);
        // oracle: the product truncated at i = 20 by naive multiplication
        let mut prod = RamifiedSeries::theta_frac(&k, 2).truncate(40);
        for i in 1..20u32 {
            let qi = 1i64 << i;
            let f = RamifiedSeries::one(&k).sub(&RamifiedSeries::monomial(&k, Fe::ONE, qi - 1));
            prod = prod.mul(&f.inv_rel(60).unwrap()).truncate(40);
        }
        assert_eq!(pi, prod);
    }

    #[test]
    fn carlitz_period_q3_abs() {
        let k = Ctx::new(FieldParams::new(3, 1, 2, 2)).unwrap();
        let pi = carlitz_period(&k, 60).unwrap();
        // |π̃| = 3^{3/2}: index -3 with m = 2
        assert_eq!(pi.val(), Some(-3));
        assert!(carlitz_period(&Ctx::new(FieldParams::new(3, 1, 2, 1)).unwrap(), 10).is_err());
        assert!(carlitz_period(&Ctx::new(FieldParams::new(3, 1, 1, 2)).unwrap(), 10).is_err());
    }

    #[test]
    fn generalized_period_matches_carlitz() {
        let k = Ctx::new(FieldParams::new(3, 1, 2, 2)).unwrap();
        let a = carlitz_period(&k, 80).unwrap();
        let b = generalized_period(&k, &RamifiedSeries::theta(&k), 80).unwrap();
        assert!(a.agrees_with(&b));
        assert!(b.prec() >= 78);
    }

    #[test]
    fn omega_constant_term() {
        let k = Ctx::new(FieldParams::new(2, 1, 1, 1)).unwrap();
        let om = omega_series(&k, 4, 40).unwrap();
        // |Ω(0)| = q^{-q/(q-1)} = 2^{-2}
        assert_eq!(om.coeff(0).val(), Some(2));
        assert!(om.coeff(0).agrees_with(&RamifiedSeries::monomial(&k, Fe::ONE, 2)));
    }
}
