use num_bigint::BigInt;
use proptest::prelude::*;

use wittcoh::exactpoly::{Degree, Integers, IntegersMod, MPoly, Monomial, Ring};

const VARS: u32 = 4;

fn poly() -> impl Strategy<Value = MPoly> {
    let term = (prop::collection::vec((0..VARS, 0u32..4), 0..3), -20i64..20);
    prop::collection::vec(term, 0..6).prop_map(|terms| {
        MPoly::from_terms(terms.into_iter().map(|(pairs, c)| (Monomial::from_pairs(pairs), BigInt::from(c))))
    })
}

fn point() -> impl Strategy<Value = Vec<BigInt>> {
    prop::collection::vec((-50i64..50).prop_map(BigInt::from), VARS as usize)
}

proptest! {
    #[test]
    fn addition_is_a_group(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.add(&MPoly::zero()), a.clone());
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn multiplication_is_commutative_and_distributes(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.mul(&MPoly::one()), a.clone());
    }

    #[test]
    fn pow_matches_repeated_product(a in poly(), k in 0u64..4) {
        let mut acc = MPoly::one();
        for _ in 0..k {
            acc = acc.mul(&a);
        }
        prop_assert_eq!(a.pow(k), acc);
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(a in poly(), b in poly(), x in point()) {
        let z = Integers;
        let ea = a.eval(&z, &x).unwrap();
        let eb = b.eval(&z, &x).unwrap();
        prop_assert_eq!(a.add(&b).eval(&z, &x).unwrap(), &ea + &eb);
        prop_assert_eq!(a.mul(&b).eval(&z, &x).unwrap(), &ea * &eb);

        let m = IntegersMod::new(BigInt::from(1u64 << 16));
        let xm: Vec<BigInt> = x.iter().map(|v| m.reduce(v)).collect();
        let fa = a.eval(&m, &xm).unwrap();
        let fb = b.eval(&m, &xm).unwrap();
        prop_assert_eq!(a.mul(&b).eval(&m, &xm).unwrap(), m.mul(&fa, &fb));
        prop_assert_eq!(fa, m.reduce(&ea));
    }

    #[test]
    fn json_roundtrip(a in poly()) {
        let v = a.to_json_value();
        prop_assert_eq!(MPoly::from_json_value(&v).unwrap(), a);
    }

    #[test]
    fn degrees_behave(a in poly(), b in poly()) {
        prop_assume!(!a.is_zero() && !b.is_zero());
        // over Z the product of the top-degree parts cannot cancel
        let (da, db) = (a.total_degree(), b.total_degree());
        let (Degree::Finite(da), Degree::Finite(db)) = (da, db) else { unreachable!() };
        prop_assert_eq!(a.mul(&b).total_degree(), Degree::Finite(da + db));
        prop_assert!(a.min_monomial_degree() <= a.total_degree());
    }
}
