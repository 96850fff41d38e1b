use num_bigint::BigInt;
use proptest::prelude::*;

use sl2approx::arith::Dyadic;
use sl2approx::rate::{bound_constant, fit_slope, ln_dyadic, RateSample, XAxis};

fn samples() -> impl Strategy<Value = Vec<RateSample>> {
    prop::collection::btree_set(2u64..1_000_000, 3..30).prop_flat_map(|xs| {
        let n = xs.len();
        (Just(xs), prop::collection::vec(1u64..1_000_000, n)).prop_map(|(xs, es)| {
            xs.into_iter()
                .zip(es)
                .enumerate()
                .map(|(nu, (x, e))| RateSample {
                    t_abs: Dyadic::from_int(BigInt::from(x)),
                    error: Dyadic::new(BigInt::from(e), -20),
                    nu,
                    q_next: BigInt::from(x),
                })
                .collect()
        })
    })
}

proptest! {
    #[test]
    fn slope_ignores_uniform_error_scaling(s in samples(), k in -30i64..30) {
        let scaled: Vec<RateSample> = s
            .iter()
            .map(|r| RateSample { error: r.error.shl(k), ..r.clone() })
            .collect();
        let a = fit_slope(&s, XAxis::TAbs).unwrap();
        let b = fit_slope(&scaled, XAxis::TAbs).unwrap();
        prop_assert!((a.slope - b.slope).abs() < 1e-9);
        let shift = k as f64 * std::f64::consts::LN_2;
        prop_assert!((b.intercept - a.intercept - shift).abs() < 1e-9);
        prop_assert!((a.rms - b.rms).abs() < 1e-9);
    }

    #[test]
    fn bound_constant_dominates_every_sample(s in samples(), e in -2.0f64..1.0) {
        for axis in [XAxis::TAbs, XAxis::QNext] {
            let c = bound_constant(&s, e, axis).unwrap();
            for r in &s {
                let x = ln_dyadic(&r.t_abs).unwrap();
                let lhs = c.ln() + e * x;
                prop_assert!(lhs >= ln_dyadic(&r.error).unwrap() - 1e-9);
            }
        }
    }
}
