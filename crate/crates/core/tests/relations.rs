use std::sync::Arc;

use drinfeld_core::carlitz::carlitz_period;
use drinfeld_core::relations::{
    detect_relation, graded_lex_monomials, independence_probe, trdeg_predict, CoeffRing, ProbeBounds,
    RelationBounds,
};
use drinfeld_core::{Ctx, Error, Fe, FieldParams, RamifiedSeries};

fn ctx(p: u32, e: u32, s: u32, m: u32) -> Arc<Ctx> {
    Ctx::new(FieldParams::new(p, e, s, m)).unwrap()
}

fn minus_one(k: &Ctx) -> Fe {
    k.from_int(-1)
}

#[test]
fn square_root_of_theta() {
    let k = ctx(3, 1, 1, 2);
    let xi = RamifiedSeries::theta_frac(&k, 1);
    let b = RelationBounds { d: 2, h: 2, v_t: 30 * k.m(), ring: CoeffRing::Base };
    let cert = detect_relation(&xi, b).unwrap().expect("relation");
    // X^2 - θ
    assert_eq!(cert.p.coeffs, vec![vec![Fe::ZERO, minus_one(&k)], vec![], vec![Fe::ONE]]);
    assert!(cert.val >= b.v_t);
}

#[test]
fn square_root_over_extended_ring_is_linear() {
    let k = ctx(3, 1, 1, 2);
    let xi = RamifiedSeries::theta_frac(&k, 1);
    let b = RelationBounds { d: 2, h: 1, v_t: 30 * k.m(), ring: CoeffRing::Extended };
    let cert = detect_relation(&xi, b).unwrap().expect("relation");
    assert_eq!(cert.p.degree(), Some(1));
    assert_eq!(cert.p.coeffs[0], vec![Fe::ZERO, minus_one(&k)]);
}

#[test]
fn rational_function() {
    let k = ctx(3, 1, 1, 1);
    let theta = RamifiedSeries::theta(&k);
    let num = theta.add(&RamifiedSeries::one(&k));
    let xi = num.mul(&theta.inv_rel(200).unwrap());
    let b = RelationBounds { d: 2, h: 2, v_t: 60, ring: CoeffRing::Base };
    let cert = detect_relation(&xi, b).unwrap().expect("relation");
    // θX - (θ + 1)
    let mo = minus_one(&k);
    assert_eq!(cert.p.coeffs, vec![vec![mo, mo], vec![Fe::ZERO, Fe::ONE]]);
}

#[test]
fn carlitz_period_has_no_small_relation() {
    for (k, prec) in [(ctx(2, 1, 1, 1), 100), (ctx(3, 1, 2, 2), 200)] {
        let m = k.m();
        let pi = carlitz_period(&k, prec).unwrap();
        let b = RelationBounds { d: 3, h: 10, v_t: 60 * m, ring: CoeffRing::Base };
        assert!(detect_relation(&pi, b).unwrap().is_none());
    }
}

#[test]
fn insufficient_precision_is_reported() {
    let k = ctx(2, 1, 1, 1);
    let pi = carlitz_period(&k, 40).unwrap();
    let b = RelationBounds { d: 3, h: 10, v_t: 60, ring: CoeffRing::Base };
    assert!(matches!(detect_relation(&pi, b), Err(Error::Precision(_))));
}

#[test]
fn probe_finds_square_relation() {
    let k = ctx(2, 1, 1, 1);
    let pi = carlitz_period(&k, 120).unwrap();
    let xs = [pi.clone(), pi.mul(&pi)];
    let b = ProbeBounds { total_degree: 2, h: 0, v_t: 60, ring: CoeffRing::Base };
    let rep = independence_probe(&xs, b).unwrap();
    assert!(rep.univariate.iter().all(|u| u.is_none()));
    let cross = rep.cross.expect("Y - X^2");
    let support: Vec<_> = cross
        .monomials
        .iter()
        .zip(&cross.coeffs)
        .filter(|(_, c)| c.iter().any(|x| !x.is_zero()))
        .map(|(e, _)| e.clone())
        .collect();
    assert_eq!(support, vec![vec![0, 1], vec![2, 0]]);
    assert!(cross.val >= 60);
}

#[test]
fn probe_on_independent_radicals() {
    let k = ctx(2, 1, 1, 6);
    let xs = [RamifiedSeries::theta_frac(&k, 3), RamifiedSeries::theta_frac(&k, 2)];
    let b = ProbeBounds { total_degree: 3, h: 2, v_t: 40 * k.m(), ring: CoeffRing::Base };
    let rep = independence_probe(&xs, b).unwrap();
    let degs: Vec<_> = rep.univariate.iter().map(|u| u.as_ref().and_then(|c| c.p.degree())).collect();
    assert_eq!(degs, vec![Some(2), Some(3)]);
    assert!(rep.cross.is_none());
}

#[test]
fn monomials_are_graded_lex() {
    let m = graded_lex_monomials(2, 2, &[usize::MAX, usize::MAX]);
    assert_eq!(m, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
    let capped = graded_lex_monomials(2, 3, &[2, 3]);
    assert_eq!(capped.len(), 6);
}

#[test]
fn transcendence_degree_predictions() {
    assert_eq!(trdeg_predict(&[2, 2, 2], true, true, None).unwrap().predicted, 4);
    assert_eq!(trdeg_predict(&[2, 3], true, true, None).unwrap().predicted, 4);
    assert_eq!(trdeg_predict(&[2], true, true, Some(2)).unwrap().single_module, Some(2));
    assert!(trdeg_predict(&[3], true, true, Some(2)).is_err());
}
