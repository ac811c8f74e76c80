use std::sync::Arc;

use drinfeld_core::drinfeld::DrinfeldModule;
use drinfeld_core::linalg::FpMatrix;
use drinfeld_core::poly::ThetaPoly;
use drinfeld_core::{Ctx, Fe, FieldParams, RamifiedSeries};
use proptest::prelude::*;
use rand::SeedableRng;

fn f9() -> Arc<Ctx> {
    Ctx::new(FieldParams::new(3, 1, 2, 2)).unwrap()
}

fn series(k: &Arc<Ctx>, start: i64, digits: &[u16], prec_len: i64) -> RamifiedSeries {
    let coeffs = digits.iter().map(|&d| Fe(d % k.size() as u16)).collect();
    RamifiedSeries::new(k, start, coeffs, start + prec_len)
}

fn arb_series() -> impl Strategy<Value = (i64, Vec<u16>, i64)> {
    (-20i64..20, prop::collection::vec(0u16..9, 0..12), 1i64..30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn valuation_is_ultrametric(a in arb_series(), b in arb_series()) {
        let k = f9();
        let x = series(&k, a.0, &a.1, a.2.max(a.1.len() as i64));
        let y = series(&k, b.0, &b.1, b.2.max(b.1.len() as i64));
        let s = x.add(&y);
        prop_assert!(s.val_or_prec() >= x.val_or_prec().min(y.val_or_prec()));
        if let (Some(vx), Some(vy)) = (x.val(), y.val()) {
            if vx != vy {
                prop_assert_eq!(s.val(), Some(vx.min(vy)));
            }
            prop_assert_eq!(x.mul(&y).val(), Some(vx + vy));
        }
        prop_assert_eq!(s.prec(), x.prec().min(y.prec()));
    }

    #[test]
    fn kernel_vectors_are_annihilated(
        rows in 1usize..8,
        cols in 1usize..10,
        seed in prop::collection::vec(0u32..5, 80),
    ) {
        let columns: Vec<Vec<u32>> = (0..cols).map(|j| (0..rows).map(|i| seed[(i * cols + j) % 80]).collect()).collect();
        let m = FpMatrix::from_columns(5, rows, &columns).unwrap();
        let ker = m.kernel();
        prop_assert_eq!(ker.len() + m.rank(), cols);
        for v in ker {
            prop_assert!(m.mul_vec(&v).iter().all(|&x| x == 0));
        }
    }
}

#[test]
fn phi_is_a_ring_homomorphism() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for k in [Ctx::new(FieldParams::new(2, 1, 1, 1)).unwrap(), Ctx::new(FieldParams::new(3, 1, 1, 1)).unwrap()] {
        for n in 0..25 {
            let phi = DrinfeldModule::random(&k, 1 + n % 3, 3, &mut rng).unwrap();
            let a = ThetaPoly::random_below_degree(&k, 4, &mut rng);
            let b = ThetaPoly::random_below_degree(&k, 4, &mut rng);
            let ab = phi.phi_of_a_exact(&a.mul(&k, &b)).unwrap();
            let prod = phi.phi_of_a_exact(&a).unwrap().mul(&phi.phi_of_a_exact(&b).unwrap());
            assert_eq!(ab, prod);
        }
    }
}

#[test]
fn functional_equations_hold_for_random_modules() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for k in [Ctx::new(FieldParams::new(2, 1, 1, 1)).unwrap(), Ctx::new(FieldParams::new(3, 1, 1, 1)).unwrap()] {
        let prec = 80;
        for r in 1..=3 {
            let phi = DrinfeldModule::random(&k, r, 3, &mut rng).unwrap();
            assert!(phi.exp_functional_residual(10, prec).unwrap() * 10 >= 8 * prec);
            for i in 0..r {
                let v = phi.quasi_functional_residual(i, 10, prec).unwrap();
                assert!(v * 10 >= 8 * prec, "r={r} i={i}: {v}");
            }
        }
    }
}
