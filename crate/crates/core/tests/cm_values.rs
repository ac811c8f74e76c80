use std::sync::Arc;

use drinfeld_core::carlitz::generalized_period;
use drinfeld_core::cm::{cm_point, CmKind};
use drinfeld_core::eisenstein::{eisenstein_eval, EisensteinSpec, EvalBudget};
use drinfeld_core::poly::ThetaPoly;
use drinfeld_core::relations::{cm_value_certify, detect_relation, CoeffRing, RelationBounds};
use drinfeld_core::{Ctx, Fe, FieldParams, RamifiedSeries};

fn ctx(p: u32, e: u32, s: u32, m: u32) -> Arc<Ctx> {
    Ctx::new(FieldParams::new(p, e, s, m)).unwrap()
}

fn eis(k: &Arc<Ctx>, v: [ThetaPoly; 2], prec: i64) -> RamifiedSeries {
    let spec = EisensteinSpec::new(k, ThetaPoly::theta(), v.to_vec()).unwrap();
    let w = cm_point(k, &CmKind::SqrtTheta, prec).unwrap().point;
    eisenstein_eval(&spec, &w, prec, EvalBudget { max_degree: 14, guard: 24 }).unwrap().value
}

fn ratio(k: &Arc<Ctx>, prec: i64) -> RamifiedSeries {
    let a = eis(k, [ThetaPoly::one(), ThetaPoly::zero()], prec);
    let b = eis(k, [ThetaPoly::zero(), ThetaPoly::one()], prec);
    a.mul(&b.inv_rel(b.rel_prec()).unwrap())
}

#[test]
fn eisenstein_ratio_at_sqrt_theta_is_algebraic_and_stable() {
    // fixtures in y = θ^{1/2}: y X^3 − y X + 1 (q = 3) and y X^2 + y X + 1 (q = 2)
    let z = Fe::ZERO;
    let fixtures = [
        (ctx(3, 1, 2, 4), vec![vec![Fe::ONE], vec![z, z, Fe(2)], vec![], vec![z, z, Fe::ONE]]),
        (ctx(2, 1, 1, 2), vec![vec![Fe::ONE], vec![z, Fe::ONE], vec![z, Fe::ONE]]),
    ];
    for (k, want) in fixtures {
        let m = k.m();
        let prec = 60 * m;
        let b = RelationBounds { d: 4, h: 8, v_t: prec / 2, ring: CoeffRing::Extended };
        let c1 = detect_relation(&ratio(&k, prec), b).unwrap().expect("certificate");
        let c2 = detect_relation(&ratio(&k, prec + 20 * m), b).unwrap().expect("certificate at prec+20");
        assert_eq!(c1.p, c2.p);
        assert_eq!(c1.p.coeffs, want);
    }
}

#[test]
fn reference_over_itself_is_one() {
    let k = ctx(2, 1, 1, 2);
    let x = eis(&k, [ThetaPoly::one(), ThetaPoly::zero()], 80);
    let b = RelationBounds { d: 1, h: 0, v_t: 40, ring: CoeffRing::Base };
    let out = cm_value_certify(&[("self".into(), x.clone())], &x, b, x.rel_prec()).unwrap();
    let cert = out[0].certificate.as_ref().expect("X - 1");
    assert_eq!(cert.p.coeffs, vec![vec![k.from_int(-1)], vec![Fe::ONE]]);
}

#[test]
fn eisenstein_value_over_cm_period_is_algebraic() {
    let k = ctx(3, 1, 2, 4);
    let prec = 60 * k.m();
    let y = RamifiedSeries::theta_frac(&k, k.m() / 2);
    let lambda = generalized_period(&k, &y, prec).unwrap();
    let values = vec![
        ("E_(1,0)".to_string(), eis(&k, [ThetaPoly::one(), ThetaPoly::zero()], prec)),
        ("E_(0,1)".to_string(), eis(&k, [ThetaPoly::zero(), ThetaPoly::one()], prec)),
    ];
    let b = RelationBounds { d: 4, h: 8, v_t: prec / 2, ring: CoeffRing::Extended };
    for e in cm_value_certify(&values, &lambda, b, prec).unwrap() {
        assert!(e.certificate.is_some(), "{}: {:?}", e.label, e.inconclusive);
    }
}

#[test]
fn non_isogenous_cm_period_ratios_show_no_relation() {
    use drinfeld_core::carlitz::carlitz_period;
    use drinfeld_core::relations::{independence_probe, ProbeBounds};
    let k = ctx(3, 1, 2, 4);
    let m = k.m();
    let prec = 120 * m;
    let theta = RamifiedSeries::theta(&k);
    let y1 = RamifiedSeries::theta_frac(&k, m / 2);
    let y2 = theta.add(&RamifiedSeries::one(&k)).nth_root(2, prec).unwrap();
    let pinv = carlitz_period(&k, prec).unwrap().inv_rel(prec).unwrap();
    let xs: Vec<_> = [y1, y2]
        .iter()
        .map(|y| generalized_period(&k, y, prec).unwrap().mul(&pinv))
        .collect();
    let b = ProbeBounds { total_degree: 3, h: 8, v_t: 60 * m, ring: CoeffRing::Base };
    let rep = independence_probe(&xs, b).unwrap();
    assert!(rep.univariate.iter().all(|u| u.is_none()));
    assert!(rep.cross.is_none());
}
