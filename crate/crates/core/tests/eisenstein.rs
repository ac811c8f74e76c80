use drinfeld_core::cm::{cm_point, generic_samples, CmKind, UpperHalfPoint};
use drinfeld_core::eisenstein::{eisenstein_brute, eisenstein_eval, EisensteinSpec, EvalBudget};
use drinfeld_core::poly::ThetaPoly;
use drinfeld_core::{Ctx, Fe, FieldParams, RamifiedSeries};

fn spec(k: &Ctx, v: [&str; 2]) -> EisensteinSpec {
    EisensteinSpec::new(
        k,
        ThetaPoly::theta(),
        v.iter().map(|s| ThetaPoly::parse(k, s).unwrap()).collect(),
    )
    .unwrap()
}

#[test]
fn partial_sum_equals_direct_enumeration() {
    let k = Ctx::new(FieldParams::new(3, 1, 2, 2)).unwrap();
    let pt = cm_point(&k, &CmKind::SqrtTheta, 60).unwrap().point;
    let sp = spec(&k, ["1", "0"]);
    let rel = 60;
    let lat = pt.lattice();
    for d in 1..=3 {
        let sub = lat.subspace_exp(d, rel).unwrap();
        let x = drinfeld_core::eisenstein::u_dot(&sp, &pt, rel).unwrap();
        let fast = sub.reciprocal_sum(&x).unwrap();
        let slow = eisenstein_brute(&sp, &pt, d, rel).unwrap();
        let diff = fast.sub(&slow);
        assert!(diff.val_or_prec() >= fast.val().unwrap() + rel - 8, "D={d}: {diff}");
    }
}

#[test]
fn dominant_term_and_stabilization() {
    let k = Ctx::new(FieldParams::new(3, 1, 2, 2)).unwrap();
    let m = k.m();
    let pt = cm_point(&k, &CmKind::SqrtTheta, 60).unwrap().point;
    let sp = spec(&k, ["1", "0"]);
    let e = eisenstein_eval(&sp, &pt, 60 * m, EvalBudget::default()).unwrap();
    // a = 0 term: 1/(θ^{1/2}/θ) = θ^{1/2}
    assert_eq!(e.value.val(), Some(-1));
    let lo = eisenstein_brute(&sp, &pt, 3, 60 * m).unwrap();
    let hi = eisenstein_brute(&sp, &pt, 4, 60 * m).unwrap();
    // the layer recursion converges double-exponentially: D = 3 already agrees
    assert!(lo.sub(&e.value).val_or_prec() >= 55 * m);
    assert!(hi.sub(&e.value).val_or_prec() >= lo.sub(&e.value).val_or_prec());
}

#[test]
fn shifting_u_by_integral_vector_is_invisible() {
    let k = Ctx::new(FieldParams::new(3, 1, 2, 2)).unwrap();
    let pt = cm_point(&k, &CmKind::SqrtTheta, 60).unwrap().point;
    let a = spec(&k, ["1", "2"]);
    let b = EisensteinSpec::new(
        &k,
        ThetaPoly::theta(),
        vec![ThetaPoly::parse(&k, "θ^2+1").unwrap(), ThetaPoly::parse(&k, "θ+2").unwrap()],
    )
    .unwrap();
    let ea = eisenstein_eval(&a, &pt, 80, EvalBudget::default()).unwrap();
    let eb = eisenstein_eval(&b, &pt, 80, EvalBudget::default()).unwrap();
    assert!(ea.value.agrees_with(&eb.value));
}

#[test]
fn weight_one_homogeneity() {
    let k = Ctx::new(FieldParams::new(3, 1, 2, 2)).unwrap();
    let pts = generic_samples(&k, 3, 11).unwrap();
    let sp = spec(&k, ["1", "1"]);
    let c = RamifiedSeries::new(&k, -2, vec![Fe(1), Fe(0), Fe(1)], drinfeld_core::EXACT);
    for p in pts {
        let e = eisenstein_eval(&sp, &p, 80, EvalBudget::default()).unwrap();
        // scaling every basis vector: evaluate the lattice sum on cΛ directly
        let lat = p.lattice().reduced().unwrap().scaled(&c);
        let x = drinfeld_core::eisenstein::u_dot(&sp, &p, 200).unwrap().mul(&c);
        let sub = lat.subspace_exp(4, 120).unwrap();
        let scaled = sub.reciprocal_sum(&x).unwrap();
        let want = e.value.mul(&c.inv_rel(200).unwrap());
        assert!(scaled.sub(&want).val_or_prec() >= 70);
    }
}

#[test]
fn domain_errors() {
    let k = Ctx::new(FieldParams::new(3, 1, 2, 2)).unwrap();
    let zero = EisensteinSpec::new(&k, ThetaPoly::theta(), vec![ThetaPoly::zero(), ThetaPoly::theta()]);
    assert!(zero.is_err());
    let nonmonic = EisensteinSpec::new(&k, ThetaPoly::parse(&k, "2θ").unwrap(), vec![ThetaPoly::one(); 2]);
    assert!(nonmonic.is_err());
    let _ = UpperHalfPoint::new(vec![RamifiedSeries::one(&k)]).unwrap();
}
