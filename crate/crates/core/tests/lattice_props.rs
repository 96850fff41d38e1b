mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sl2approx::arith::ApproxReal;
use sl2approx::cf::{expand, ExpandMode};
use sl2approx::lattice::{
    basis_from_convergents, corollary_points, fundamental_box, max_norm, norm_bound, reduce, shifted_box, IMat2,
};

const BITS: u32 = 256;

fn rat(n: i64, d: i64) -> ApproxReal {
    ApproxReal::from_rational(&BigRational::new(n.into(), d.into()), BITS)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_points_reduce_into_the_fundamental_box(
        seed in any::<u64>(),
        nu in 0usize..=12,
        pts in prop::collection::vec((-10_000i64..=10_000, -10_000i64..=10_000), 1..40),
    ) {
        let a = common::random_source(&mut ChaCha8Rng::seed_from_u64(seed));
        let cs = expand(a.beta(), a.delta(), nu + 2, ExpandMode::Irrational).unwrap();
        let basis = basis_from_convergents(&a, &cs[nu], &cs[nu + 1], BITS);
        prop_assert!(basis.change_det().abs() == BigInt::from(1));
        let m = norm_bound(&a, BITS).unwrap();
        let bx = fundamental_box(&m, &cs[nu + 1].q);
        for (u, v) in pts {
            let p = [rat(u, 1000), rat(v, 1000)];
            let red = reduce(&basis, &p).unwrap();
            prop_assert!(bx.contains(&red.point), "({u}, {v}) at nu = {nu}");
            // the difference is the lattice point with the recorded coordinates
            let back = basis.combine(&red.point, &red.l1, &red.l2);
            prop_assert!(back[0].overlaps(&p[0]) && back[1].overlaps(&p[1]));
        }
    }

    #[test]
    fn corollary_boxes_hold_enough_points(seed in any::<u64>(), nu in 0usize..=12, eta in -5000i64..=5000, r in 1u32..=3) {
        let a = common::random_source(&mut ChaCha8Rng::seed_from_u64(seed));
        let cs = expand(a.beta(), a.delta(), nu + 2, ExpandMode::Irrational).unwrap();
        let basis = basis_from_convergents(&a, &cs[nu], &cs[nu + 1], BITS);
        let eta = rat(eta, 1000);
        let m = norm_bound(&a, BITS).unwrap();
        let bx = shifted_box(&m, &cs[nu + 1].q, &eta, &BigInt::from(r));
        let pts = corollary_points(&basis, &eta, r).unwrap();
        let inside = pts.iter().filter(|(_, _, p)| bx.contains(p)).count();
        prop_assert!(inside >= ((2 * r + 1) * (2 * r + 1)) as usize);
    }

    #[test]
    fn max_norm_is_a_norm(
        a in prop::array::uniform4(-1000i64..1000),
        b in prop::array::uniform4(-1000i64..1000),
        c in -50i64..50,
    ) {
        let mk = |v: [i64; 4]| IMat2(v.map(|x| rat(x, 7)));
        let (ma, mb) = (mk(a), mk(b));
        let sum = IMat2([0, 1, 2, 3].map(|i| &ma.0[i] + &mb.0[i]));
        prop_assert!(max_norm(&sum).possibly_le(&(max_norm(&ma) + max_norm(&mb))));
        let scaled = IMat2(ma.0.clone().map(|x| x.mul_int(&BigInt::from(c))));
        let lhs = max_norm(&scaled);
        let rhs = max_norm(&ma).mul_int(&BigInt::from(c.abs()));
        prop_assert!(lhs.overlaps(&rhs));
        let zero = max_norm(&ma).certified_sign() == Some(0) || max_norm(&ma).contains_zero();
        prop_assert_eq!(zero, a.iter().all(|&x| x == 0));
    }
}
