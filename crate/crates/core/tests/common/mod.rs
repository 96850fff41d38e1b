#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use sl2approx::arith::Quad;
use sl2approx::boxdet::{BoxDetProblem, IntInterval};
use sl2approx::lattice::Mat2R;

pub fn is_square(n: i64) -> bool {
    let s = (n as f64).sqrt().round() as i64;
    (s - 1..=s + 1).any(|r| r >= 0 && r * r == n)
}

/// `(a + b sqrt(d)) / c` when it is irrational.
pub fn surd(a: i64, b: i64, c: i64, d: i64) -> Option<Quad> {
    if b == 0 || c == 0 || d < 2 || is_square(d) {
        return None;
    }
    Quad::new(a.into(), b.into(), c.into(), d.into())
}

/// `K [[1, 0], [x, 1]]` for an integer unimodular `K` (row-major).
pub fn sheared_source(k: [i64; 4], x: &Quad) -> Mat2R {
    assert_eq!(k[0] * k[3] - k[1] * k[2], 1);
    let i = |n: i64| Quad::from_int(n.into());
    let add = |n: i64, m: i64| i(n).add(&x.mul_int(&m.into())).unwrap();
    Mat2R::from_quads(add(k[0], k[1]), i(k[1]), add(k[2], k[3]), i(k[3])).unwrap()
}

/// Product of random elementary matrices with small entries and `k22 != 0`.
pub fn random_unimodular(rng: &mut ChaCha8Rng) -> [i64; 4] {
    loop {
        let mut k = [1i64, 0, 0, 1];
        for _ in 0..rng.gen_range(0..4) {
            let s = rng.gen_range(-2i64..=2);
            let e = if rng.gen_bool(0.5) { [1, s, 0, 1] } else { [1, 0, s, 1] };
            k = [
                k[0] * e[0] + k[1] * e[2],
                k[0] * e[1] + k[1] * e[3],
                k[2] * e[0] + k[3] * e[2],
                k[2] * e[1] + k[3] * e[3],
            ];
        }
        if k[3] != 0 && k.iter().all(|v| v.abs() <= 12) {
            return k;
        }
    }
}

pub fn random_surd(rng: &mut ChaCha8Rng) -> Quad {
    loop {
        let d = rng.gen_range(2i64..60);
        let b = rng.gen_range(-4i64..=4);
        if let Some(q) = surd(rng.gen_range(-20..=20), b, rng.gen_range(1..=9), d) {
            return q;
        }
    }
}

pub fn random_source(rng: &mut ChaCha8Rng) -> Mat2R {
    sheared_source(random_unimodular(rng), &random_surd(rng))
}

fn bounds(iv: &IntInterval) -> (i64, i64) {
    (iv.lo.to_i64().unwrap(), iv.hi.to_i64().unwrap())
}

/// Plain four-fold loop over the box looking for `xy - zw = 1`.
pub fn brute_force(p: &BoxDetProblem) -> Option<(i64, i64, i64, i64)> {
    let (x0, x1) = bounds(&p.x);
    let (y0, y1) = bounds(&p.y);
    let (z0, z1) = bounds(&p.z);
    let (w0, w1) = bounds(&p.w);
    for x in x0..=x1 {
        for y in y0..=y1 {
            let xy = x * y;
            for z in z0..=z1 {
                for w in w0..=w1 {
                    if xy - z * w == 1 {
                        return Some((x, y, z, w));
                    }
                }
            }
        }
    }
    None
}

/// Whether some `x` in `[xl, xh]`, `y` in `[yl, yh]` has `xy = 1 mod p`.
pub fn inverse_pair_exists(p: i64, (xl, xh): (i64, i64), (yl, yh): (i64, i64)) -> bool {
    (xl..=xh).any(|x| {
        let x = x.mod_floor(&p);
        if x == 0 {
            return false;
        }
        let e = BigInt::from(x).extended_gcd(&BigInt::from(p));
        let inv = e.x.to_i64().unwrap().mod_floor(&p);
        // smallest y >= yl congruent to inv
        let y = yl + (inv - yl).mod_floor(&p);
        y <= yh
    })
}

/// Random problem with `Q <= 50`: centers within `2Q` of the origin,
/// `|sigma| <= 3`, both pairings.
pub fn random_box_problem(rng: &mut ChaCha8Rng) -> BoxDetProblem {
    use num_rational::BigRational;
    use sl2approx::arith::ApproxReal;
    use sl2approx::boxdet::Pairing;

    let q = rng.gen_range(2i64..=50);
    let r = [(4, 5), (7, 9), (9, 10), (19, 25)][rng.gen_range(0..4)];
    let real = |rng: &mut ChaCha8Rng, span: i64| {
        let den = rng.gen_range(1i64..=64);
        let num = rng.gen_range(-span * den..=span * den);
        ApproxReal::from_rational(&BigRational::new(num.into(), den.into()), 128)
    };
    let a1 = real(rng, 2 * q);
    let b1 = real(rng, 2 * q);
    let sigma = real(rng, 3);
    let pairing = match rng.gen_range(0..3) {
        0 => Pairing::Literal,
        1 => Pairing::Basis { s: 1 },
        _ => Pairing::Basis { s: -1 },
    };
    BoxDetProblem::new(
        a1,
        b1,
        sigma,
        BigRational::from_integer(q.into()),
        BigRational::new(r.0.into(), r.1.into()),
        pairing,
    )
    .unwrap()
}
