use std::sync::Arc;

use drinfeld_core::carlitz::carlitz_period;
use drinfeld_core::drinfeld::DrinfeldModule;
use drinfeld_core::periods::{determinant, legendre_check, period_matrix, sqrt_theta_cm_module, PeriodMatrix, PeriodOptions};
use drinfeld_core::relations::{CoeffRing, RelationBounds};
use drinfeld_core::{Ctx, Error, Fe, FieldParams, RamifiedSeries};

fn ctx(p: u32, e: u32, s: u32, m: u32) -> Arc<Ctx> {
    Ctx::new(FieldParams::new(p, e, s, m)).unwrap()
}

fn opts(k: &Ctx, prec_theta: i64) -> PeriodOptions {
    let prec = prec_theta * k.m();
    PeriodOptions { kmax: 12, prec, threshold: 8 * prec / 10 }
}

#[test]
fn carlitz_period_matrix_is_minus_pi() {
    for k in [ctx(2, 1, 1, 1), ctx(3, 1, 2, 2)] {
        let o = opts(&k, 60);
        let pi = carlitz_period(&k, o.prec).unwrap();
        let p = period_matrix(&DrinfeldModule::carlitz(&k), &[pi.clone()], o).unwrap();
        assert!(p.entries[0][0].add(&pi).is_zero());
        let b = RelationBounds { d: 1, h: 0, v_t: 30 * k.m(), ring: CoeffRing::Base };
        let res = legendre_check(&p, &pi, b).unwrap();
        let cert = res.certificate.expect("X + 1");
        assert_eq!(cert.p.coeffs, vec![vec![Fe::ONE], vec![Fe::ONE]]);
    }
}

#[test]
fn non_period_is_rejected() {
    let k = ctx(2, 1, 1, 1);
    let one = RamifiedSeries::one(&k);
    let err = period_matrix(&DrinfeldModule::carlitz(&k), &[one], opts(&k, 40)).unwrap_err();
    assert!(matches!(err, Error::NotPeriod(_)));
}

#[test]
fn cm_legendre_determinant_is_algebraic() {
    // regression fixtures: det/π̃ is a constant of F_{q^s}
    for (k, c0) in [(ctx(2, 1, 1, 2), Fe(1)), (ctx(3, 1, 2, 4), Fe(5))] {
        let o = opts(&k, 60);
        let (psi, periods, _) = sqrt_theta_cm_module(&k, o.prec).unwrap();
        let p = period_matrix(&psi, &periods, o).unwrap();
        let det = determinant(&k, &p.entries);
        assert!(!det.is_zero());
        let pi = carlitz_period(&k, o.prec).unwrap();
        let b = RelationBounds { d: 4, h: 8, v_t: o.prec / 2, ring: CoeffRing::Extended };
        let res = legendre_check(&p, &pi, b).unwrap();
        let cert = res.certificate.unwrap_or_else(|| panic!("q={}: no certificate for {}", k.q(), res.xi));
        assert!(cert.val >= b.v_t);
        assert_eq!(cert.p.coeffs, vec![vec![c0], vec![Fe::ONE]]);
    }
}

#[test]
fn random_matrix_is_inconclusive() {
    let k = ctx(2, 1, 1, 1);
    let o = opts(&k, 60);
    let pi = carlitz_period(&k, o.prec).unwrap();
    let omega = drinfeld_core::carlitz::omega_at_theta(&k, o.prec).unwrap();
    let entries = vec![
        vec![pi.clone(), omega.clone()],
        vec![omega.mul(&omega), RamifiedSeries::theta(&k)],
    ];
    let p = PeriodMatrix { entries, period_residual: 0 };
    let b = RelationBounds { d: 3, h: 4, v_t: 30, ring: CoeffRing::Base };
    assert!(legendre_check(&p, &pi, b).unwrap().certificate.is_none());
}
