//! Exact arithmetic in real quadratic fields: values `(a + b*sqrt(d)) / c`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::approx::{enclose_exact, ApproxReal};

/// `(a + b*sqrt(d)) / c` with `c > 0`, `gcd(a, b, c) = 1`, and `d = 0`
/// whenever `b = 0`. When `b != 0`, `d` is positive and not a perfect square.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quad {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

pub(crate) fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let s = n.sqrt();
    &s * &s == *n
}

impl Quad {
    /// Build and normalize. Returns `None` when `c = 0` or `d < 0` with `b != 0`.
    /// A perfect-square `d` is folded into the rational part.
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Option<Quad> {
        if c.is_zero() || (d.is_negative() && !b.is_zero()) {
            return None;
        }
        let (mut a, mut b, mut c, mut d) = (a, b, c, d);
        if b.is_zero() || d.is_zero() {
            b = BigInt::zero();
            d = BigInt::zero();
        } else if is_perfect_square(&d) {
            a += &b * d.sqrt();
            b = BigInt::zero();
            d = BigInt::zero();
        }
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = a.gcd(&b).gcd(&c);
        if !g.is_one() && !g.is_zero() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        Some(Quad { a, b, c, d })
    }

    pub fn from_int(n: BigInt) -> Quad {
        Quad {
            a: n,
            b: BigInt::zero(),
            c: BigInt::one(),
            d: BigInt::zero(),
        }
    }

    pub fn from_rational(r: &BigRational) -> Quad {
        Quad::new(
            r.numer().clone(),
            BigInt::zero(),
            r.denom().clone(),
            BigInt::zero(),
        )
        .expect("rational denominators are nonzero")
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn c(&self) -> &BigInt {
        &self.c
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational()
            .then(|| BigRational::new(self.a.clone(), self.c.clone()))
    }

    /// Radicand of the field, `None` for rationals.
    pub fn radicand(&self) -> Option<&BigInt> {
        (!self.is_rational()).then_some(&self.d)
    }

    /// Rewrite `self` over radicand `d` when `sqrt(self.d)` is a rational
    /// multiple of `sqrt(d)`.
    fn over(&self, d: &BigInt) -> Option<Quad> {
        if self.is_rational() {
            return Some(Quad {
                d: d.clone(),
                ..self.clone()
            });
        }
        if &self.d == d {
            return Some(self.clone());
        }
        let prod = &self.d * d;
        if !is_perfect_square(&prod) {
            return None;
        }
        // sqrt(d_self) = sqrt(d_self * d) / d * sqrt(d)
        let s = prod.sqrt();
        Some(Quad {
            a: &self.a * d,
            b: &self.b * s,
            c: &self.c * d,
            d: d.clone(),
        })
    }

    /// Both operands over a shared radicand, or `None` if the fields differ.
    fn common(&self, other: &Quad) -> Option<(Quad, Quad, BigInt)> {
        let d = match (self.radicand(), other.radicand()) {
            (None, None) => BigInt::zero(),
            (Some(d), _) => d.clone(),
            (None, Some(d)) => d.clone(),
        };
        Some((self.over(&d)?, other.over(&d)?, d))
    }

    pub fn same_field(&self, other: &Quad) -> bool {
        self.common(other).is_some()
    }

    pub fn neg(&self) -> Quad {
        Quad {
            a: -&self.a,
            b: -&self.b,
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Quad) -> Option<Quad> {
        let (x, y, d) = self.common(other)?;
        Quad::new(
            &x.a * &y.c + &y.a * &x.c,
            &x.b * &y.c + &y.b * &x.c,
            &x.c * &y.c,
            d,
        )
    }

    pub fn sub(&self, other: &Quad) -> Option<Quad> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Quad) -> Option<Quad> {
        let (x, y, d) = self.common(other)?;
        Quad::new(
            &x.a * &y.a + &x.b * &y.b * &d,
            &x.a * &y.b + &x.b * &y.a,
            &x.c * &y.c,
            d,
        )
    }

    /// Field inverse; `None` for zero.
    pub fn recip(&self) -> Option<Quad> {
        if self.is_zero() {
            return None;
        }
        // c / (a + b sqrt d) = c (a - b sqrt d) / (a^2 - b^2 d)
        let norm = &self.a * &self.a - &self.b * &self.b * &self.d;
        Quad::new(&self.c * &self.a, -&self.c * &self.b, norm, self.d.clone())
    }

    pub fn div(&self, other: &Quad) -> Option<Quad> {
        self.mul(&other.recip()?)
    }

    pub fn mul_int(&self, n: &BigInt) -> Quad {
        Quad::new(&self.a * n, &self.b * n, self.c.clone(), self.d.clone()).unwrap()
    }

    /// Exact sign of `a + b*sqrt(d)` (and hence of the value, as `c > 0`).
    pub fn signum(&self) -> i32 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * &self.d;
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn abs(&self) -> Quad {
        if self.signum() < 0 {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Exact comparison when both values lie in a common field.
    pub fn cmp_exact(&self, other: &Quad) -> Option<Ordering> {
        let diff = self.sub(other)?;
        Some(diff.signum().cmp(&0))
    }

    /// `floor((a + b*sqrt(d)) * 2^m / c)`, exact.
    pub fn floor_scaled(&self, m: i64) -> BigInt {
        let (num_a, num_b, den) = if m >= 0 {
            (
                &self.a << m as u64,
                &self.b << m as u64,
                self.c.clone(),
            )
        } else {
            (self.a.clone(), self.b.clone(), &self.c << (-m) as u64)
        };
        // floor(y / den) == floor(floor(y) / den) for a positive integer den.
        let fl = &num_a + floor_b_sqrt_d(&num_b, &self.d);
        fl.div_floor(&den)
    }

    pub fn floor(&self) -> BigInt {
        self.floor_scaled(0)
    }

    /// Whether `value * 2^m` is an integer (only possible for rationals).
    pub fn exact_at(&self, m: i64) -> bool {
        if !self.is_rational() {
            return false;
        }
        if m >= 0 {
            (&self.a << m as u64).is_multiple_of(&self.c)
        } else {
            self.a.is_multiple_of(&(&self.c << (-m) as u64))
        }
    }

    /// Enclosure with at least `bits` certified leading bits.
    pub fn eval(&self, bits: u32) -> ApproxReal {
        enclose_exact(
            bits,
            self.is_zero(),
            |m| self.floor_scaled(m),
            |m| self.exact_at(m),
        )
    }
}

fn sign_of(n: &BigInt) -> i32 {
    if n.is_positive() {
        1
    } else if n.is_negative() {
        -1
    } else {
        0
    }
}

/// `floor(b * sqrt(d))` for a non-square `d` (or `b = 0`).
fn floor_b_sqrt_d(b: &BigInt, d: &BigInt) -> BigInt {
    if b.is_zero() || d.is_zero() {
        return BigInt::zero();
    }
    let r = (b * b * d).sqrt();
    if b.is_positive() {
        r
    } else if &r * &r == b * b * d {
        -r
    } else {
        -r - 1
    }
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}/{}", self.a, self.c)
        } else if self.b.is_negative() {
            write!(f, "({}-{}*sqrt({}))/{}", self.a, -&self.b, self.d, self.c)
        } else {
            write!(f, "({}+{}*sqrt({}))/{}", self.a, self.b, self.d, self.c)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64, c: i64, d: i64) -> Quad {
        Quad::new(a.into(), b.into(), c.into(), d.into()).unwrap()
    }

    #[test]
    fn golden_ratio_floor_and_square() {
        let phi = q(1, 1, 2, 5);
        assert_eq!(phi.floor(), BigInt::from(1));
        // phi^2 = phi + 1
        let sq = phi.mul(&phi).unwrap();
        assert_eq!(sq, phi.add(&Quad::from_int(1.into())).unwrap());
        assert_eq!(phi.neg().floor(), BigInt::from(-2));
    }

    #[test]
    fn mixed_radicands_share_a_field() {
        // sqrt(8) = 2 sqrt(2)
        let r8 = q(0, 1, 1, 8);
        let r2 = q(0, 2, 1, 2);
        assert_eq!(r8.cmp_exact(&r2), Some(Ordering::Equal));
        assert!(q(0, 1, 1, 2).add(&q(0, 1, 1, 3)).is_none());
    }

    #[test]
    fn sign_test_against_rational() {
        // phi vs 1.618034: phi is smaller
        let phi = q(1, 1, 2, 5);
        let r = Quad::from_rational(&BigRational::new(1618034.into(), 1000000.into()));
        assert_eq!(phi.cmp_exact(&r), Some(Ordering::Less));
    }

    #[test]
    fn reciprocal_roundtrip() {
        let x = q(3, -2, 7, 11);
        let one = x.mul(&x.recip().unwrap()).unwrap();
        assert_eq!(one, Quad::from_int(1.into()));
    }

    #[test]
    fn perfect_square_radicand_folds() {
        let x = q(1, 3, 2, 9);
        assert!(x.is_rational());
        assert_eq!(x.to_rational().unwrap(), BigRational::from_integer(5.into()));
    }

    #[test]
    fn eval_encloses_value() {
        let phi = q(1, 1, 2, 5);
        let e = phi.eval(128);
        assert!(e.precision_bits() >= 128);
        assert!((e.to_f64() - 1.618_033_988_749_895).abs() < 1e-15);
    }
}
