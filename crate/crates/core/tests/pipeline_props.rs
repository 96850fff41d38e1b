mod common;

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::Signed;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sl2approx::arith::{pow_rational, Quad};
use sl2approx::cf::{CfStream, ExpandMode};
use sl2approx::lattice::Mat2R;
use sl2approx::theorem1::{construct, ApproxResult, Frame, PipelineOptions, TargetSpec};
use sl2approx::theorem2::{approximate_uniform, uniform_bound, PsiFunction};
use sl2approx::{Error, RealSpec};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn q(r: &BigRational) -> Quad {
    Quad::from_rational(r)
}

/// `[[1, s], [0, 1]] [[l, 0], [m, 1/l]]`, determinant 1 by construction.
fn target(l: &BigRational, m: &BigRational, s: &BigRational) -> Mat2R {
    let inv = l.recip();
    Mat2R::from_quads(q(&(l + s * m)), q(&(s * &inv)), q(m), q(&inv)).unwrap()
}

/// `max |u(t) A gamma - Xi|` in exact quadratic arithmetic.
fn exact_error(a: &Mat2R, xi: &Mat2R, res: &ApproxResult) -> Quad {
    let [al, ga, be, de] = a.as_quads().unwrap();
    let t = q(&res.t.to_rational());
    let ua = [
        al.add(&t.mul(&be).unwrap()).unwrap(),
        ga.add(&t.mul(&de).unwrap()).unwrap(),
        be,
        de,
    ];
    let l = res.gamma.entries();
    let x = xi.as_quads().unwrap();
    let entry = |i: usize, j: usize| {
        let s = ua[2 * i].mul_int(&l[j]).add(&ua[2 * i + 1].mul_int(&l[2 + j])).unwrap();
        s.sub(&x[2 * i + j]).unwrap().abs()
    };
    let mut best = entry(0, 0);
    for (i, j) in [(0, 1), (1, 0), (1, 1)] {
        let e = entry(i, j);
        if e.cmp_exact(&best) == Some(Ordering::Greater) {
            best = e;
        }
    }
    best
}

fn run(a: &Mat2R, xi: &Mat2R, nu: usize, opts: &PipelineOptions) -> sl2approx::Result<ApproxResult> {
    let mut s = CfStream::new(a.beta(), a.delta(), ExpandMode::Irrational)?;
    s.ensure(nu + 2)?;
    let (c, c1) = s.convergent_pair(nu)?;
    construct(a, &TargetSpec::new(xi.clone()), &Frame::from_convergents(&c, &c1), opts)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn outputs_are_unimodular_and_errors_are_exact(
        seed in any::<u64>(),
        nu in 4usize..14,
        l in (1i64..40, 1i64..20), m in -30i64..30, s in -30i64..30, neg in any::<bool>(),
    ) {
        let a = common::random_source(&mut ChaCha8Rng::seed_from_u64(seed));
        let l = rat(if neg { -l.0 } else { l.0 }, l.1);
        let xi = target(&l, &rat(m, 7), &rat(s, 5));
        let opts = PipelineOptions::new(rat(4, 5));
        match run(&a, &xi, nu, &opts) {
            Ok(res) => {
                prop_assert_eq!(res.gamma.det(), BigInt::from(1));
                let e = exact_error(&a, &xi, &res);
                let lo = q(&res.error.lower().to_rational());
                let hi = q(&res.error.upper().to_rational());
                prop_assert_ne!(e.cmp_exact(&lo), Some(Ordering::Less));
                prop_assert_ne!(e.cmp_exact(&hi), Some(Ordering::Greater));
            }
            // Small indices may legitimately fail; nothing else may.
            Err(err) => prop_assert!(
                matches!(err, Error::SolverFailed { .. } | Error::HZero { .. }),
                "unexpected {err}"
            ),
        }
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn targets_on_the_orbit_are_approached(seed in any::<u64>(), sn in -200i64..200) {
        let a = common::random_source(&mut ChaCha8Rng::seed_from_u64(seed));
        let [al, ga, be, de] = a.as_quads().unwrap();
        let s = q(&rat(sn, 3));
        let xi = Mat2R::from_quads(
            al.add(&s.mul(&be).unwrap()).unwrap(),
            ga.add(&s.mul(&de).unwrap()).unwrap(),
            be,
            de,
        )
        .unwrap();
        let opts = PipelineOptions::new(rat(4, 5));
        let errs: Vec<f64> = (8..=18usize)
            .into_par_iter()
            .map(|nu| run(&a, &xi, nu, &opts).ok().map(|r| r.error_upper()))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect();
        prop_assert!(errs.len() >= 6, "only {} successes", errs.len());
        let head = errs[..3].iter().cloned().fold(f64::MIN, f64::max);
        let tail = errs[errs.len() - 3..].iter().cloned().fold(f64::MAX, f64::min);
        prop_assert!(tail < head);
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn uniform_runs_stay_inside_the_horizon(exp10 in 2u32..7, mant in 1i64..10) {
        let a = Mat2R::new(RealSpec::int(1), RealSpec::int(0), "surd:(1+1*sqrt(5))/2".parse().unwrap(), RealSpec::int(1)).unwrap();
        let xi = TargetSpec::new(Mat2R::identity());
        let psi = PsiFunction::power_law(rat(38, 100), rat(1, 1)).unwrap();
        let horizon = BigRational::from_integer(BigInt::from(mant) * BigInt::from(10).pow(exp10));
        match approximate_uniform(&a, &xi, &psi, &horizon, &PipelineOptions::new(rat(4, 5))) {
            Ok(res) => {
                let t = res.result.t.abs().to_rational();
                prop_assert!(t >= rat(1, 1) && t <= horizon);
                prop_assert!(res.pair.det().abs() == BigInt::from(1));
            }
            Err(e) => prop_assert!(matches!(e, Error::HorizonTooSmall { .. }), "unexpected {e}"),
        }
    }
}

#[test]
fn bound_exponent_identity_on_a_grid() {
    let one = rat(1, 1);
    for omega in [rat(1, 1), rat(3, 2), rat(2, 1), rat(3, 1)] {
        let psi = PsiFunction::power_law(one.clone(), omega.clone()).unwrap();
        for r in [rat(19, 25), rat(4, 5), rat(9, 10)] {
            for t in [10i64, 1000, 1_000_000] {
                let t = rat(t, 1);
                let s = &one + &r;
                let exponent = &r / &s - (&omega * &s).recip();
                let closed = pow_rational(&t, &exponent, 128).unwrap();
                let got = uniform_bound(&psi, &t, &r, 128).unwrap();
                assert!(got.overlaps(&closed), "omega {omega} r {r} T {t}");
            }
        }
    }
}
