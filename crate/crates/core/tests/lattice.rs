use std::sync::Arc;

use drinfeld_core::carlitz::carlitz_period;
use drinfeld_core::drinfeld::DrinfeldModule;
use drinfeld_core::lattice::{drinfeld_from_lattice, Lattice};
use drinfeld_core::poly::ThetaPoly;
use drinfeld_core::{Ctx, Fe, FieldParams, RamifiedSeries};

/// Expands `z ∏_{λ ∈ V \ 0} (1 − z/λ)` as a dense polynomial in `z`.
fn brute_product(lat: &Lattice, d: usize, rel: i64) -> Vec<RamifiedSeries> {
    let k = lat.ctx();
    let r = lat.rank();
    let polys = ThetaPoly::all_below_degree(k, d);
    let n = polys.len();
    let mut poly = vec![RamifiedSeries::zero(k), RamifiedSeries::one(k)];
    for idx in 1..n.pow(r as u32) {
        let mut rest = idx;
        let mut a = Vec::new();
        for _ in 0..r {
            a.push(polys[rest % n].clone());
            rest /= n;
        }
        let lam = lat.combine(&a);
        let neg_inv = lam.inv_rel(rel).unwrap().neg();
        // multiply by (1 + neg_inv·z)
        let mut next = vec![RamifiedSeries::zero(k); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i] = next[i].add(c);
            next[i + 1] = next[i + 1].add(&c.mul(&neg_inv).truncate_rel(rel));
        }
        poly = next;
    }
    poly
}

fn check_against_brute(k: &Arc<Ctx>, lat: &Lattice, d: usize) {
    let rel = 80;
    let brute = brute_product(lat, d, rel);
    let q = k.q() as usize;
    let sub = lat.subspace_exp(d, rel).unwrap();
    let beta = sub.coeffs_raw(lat.rank() * d).unwrap();
    let mut qk = 1usize;
    let mut kk = 0usize;
    for (j, c) in brute.iter().enumerate().skip(1) {
        if j == qk {
            let b = &beta[kk];
            let diff = c.sub(b);
            // both are exact-in-principle; compare at the common relative precision
            assert!(diff.val_or_prec() >= c.val_or_prec() + rel - 10, "β_{kk} mismatch");
            kk += 1;
            qk *= q;
        } else {
            // F_q-linearity: non-q-power coefficients vanish
            assert!(c.is_zero(), "coefficient of z^{j} is {c}");
        }
    }
}

#[test]
fn subspace_recursion_matches_product_expansion() {
    let k = Ctx::new(FieldParams::new(2, 1, 1, 2)).unwrap();
    let lat = Lattice::new(&k, vec![RamifiedSeries::theta_frac(&k, 1), RamifiedSeries::one(&k)]).unwrap();
    check_against_brute(&k, &lat, 2);
    let k3 = Ctx::new(FieldParams::new(3, 1, 1, 2)).unwrap();
    let lat3 = Lattice::new(&k3, vec![RamifiedSeries::theta_frac(&k3, 1), RamifiedSeries::one(&k3)]).unwrap();
    check_against_brute(&k3, &lat3, 1);
    let lat1 = Lattice::new(&k3, vec![RamifiedSeries::theta_frac(&k3, 3)]).unwrap();
    check_against_brute(&k3, &lat1, 2);
}

#[test]
fn carlitz_lattice_gives_carlitz_exponential() {
    for (p, s, m) in [(2, 1, 1), (3, 2, 2)] {
        let k = Ctx::new(FieldParams::new(p, 1, s, m)).unwrap();
        let m = k.m();
        let prec = 60 * m;
        let pi = carlitz_period(&k, prec + 20 * m).unwrap();
        let lat = Lattice::new(&k, vec![pi]).unwrap();
        let beta = lat.exp_product(6, 4, prec + 20 * m).unwrap();
        let alpha = DrinfeldModule::carlitz(&k).exp_coeffs(4, prec + 20 * m).unwrap();
        for i in 0..=4 {
            let d = beta.coeffs()[i].sub(&alpha.coeffs()[i]);
            assert!(
                d.val_or_prec() >= alpha.coeffs()[i].val().unwrap() + prec,
                "k={i} diff val {}",
                d.val_or_prec()
            );
        }
        let phi = drinfeld_from_lattice(&lat, 6, prec + 20 * m).unwrap();
        let g1 = phi.g()[0].sub(&RamifiedSeries::one(&k));
        assert!(g1.val_or_prec() >= prec, "g1 - 1 = {g1}");
    }
}

#[test]
fn scaled_carlitz_lattice() {
    let k = Ctx::new(FieldParams::new(3, 1, 2, 2)).unwrap();
    let m = k.m();
    let prec = 40 * m;
    let pi = carlitz_period(&k, prec + 30 * m).unwrap();
    let c = RamifiedSeries::new(&k, -1, vec![Fe(1), Fe(0), Fe(4)], drinfeld_core::EXACT);
    let lat = Lattice::new(&k, vec![pi.mul(&c)]).unwrap();
    let phi = drinfeld_from_lattice(&lat, 6, prec + 30 * m).unwrap();
    let want = c.pow(2, prec + 30 * m).inv_rel(prec + 30 * m).unwrap();
    assert!(phi.g()[0].sub(&want).val_or_prec() >= prec);
}

#[test]
fn rank_two_round_trip() {
    let k = Ctx::new(FieldParams::new(3, 1, 2, 2)).unwrap();
    let m = k.m();
    let prec = 60 * m;
    let rel = prec + 20 * m;
    let pi = carlitz_period(&k, rel).unwrap();
    let basis = vec![pi.mul(&RamifiedSeries::theta_frac(&k, 1)), pi.clone()];
    let lat = Lattice::new(&k, basis.clone()).unwrap();
    let phi = drinfeld_from_lattice(&lat, 4, rel).unwrap();
    let exp = phi.exp_coeffs(10, rel).unwrap();
    for w in &basis {
        let (v, _) = exp.eval(w, prec).unwrap();
        assert!(v.val_or_prec() >= prec * 6 / 10, "exp(w) = {v}");
    }
    let stab = lat.stabilization(4, 2, rel).unwrap();
    assert!(stab[1] > 30 * m, "β_1 stabilization {}", stab[1]);
}
