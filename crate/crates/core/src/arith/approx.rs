//! Certified reals: closed intervals with dyadic endpoints and outward rounding.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::dyadic::{bit_len, Dyadic, Round};
use crate::error::{Error, Result};

/// A real number known to lie in `[lo, hi]`.
///
/// `prec` is the working mantissa width used when rounding the results of
/// arithmetic on this value; it does not by itself certify anything. The
/// number of certified leading bits is [`ApproxReal::precision_bits`], which
/// is derived from the interval width.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxReal {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

/// Outcome of comparing two certified reals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Less,
    Greater,
    Indistinguishable,
}

impl Comparison {
    pub fn ordering(self) -> Option<Ordering> {
        match self {
            Comparison::Less => Some(Ordering::Less),
            Comparison::Greater => Some(Ordering::Greater),
            Comparison::Indistinguishable => None,
        }
    }
}

/// Strict ordering when the intervals are disjoint, `Indistinguishable`
/// otherwise (including two identical exact points).
pub fn compare(a: &ApproxReal, b: &ApproxReal) -> Comparison {
    if a.hi < b.lo {
        Comparison::Less
    } else if a.lo > b.hi {
        Comparison::Greater
    } else {
        Comparison::Indistinguishable
    }
}

impl ApproxReal {
    pub fn from_bounds(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        ApproxReal { lo, hi, prec }
    }

    pub fn exact(x: Dyadic, prec: u32) -> Self {
        ApproxReal {
            lo: x.clone(),
            hi: x,
            prec,
        }
    }

    pub fn from_int(n: impl Into<BigInt>, prec: u32) -> Self {
        ApproxReal::exact(Dyadic::from_int(n.into()), prec)
    }

    pub fn zero(prec: u32) -> Self {
        ApproxReal::exact(Dyadic::zero(), prec)
    }

    pub fn one(prec: u32) -> Self {
        ApproxReal::from_int(1, prec)
    }

    /// Tightest `prec`-bit enclosure of an exact rational.
    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        if r.denom().is_one() {
            return ApproxReal::from_int(r.numer().clone(), prec);
        }
        let den = r.denom();
        if den.trailing_zeros() == Some(den.bits() - 1) && bit_len(r.numer()) <= prec as u64 {
            let x = Dyadic::new(r.numer().clone(), -((den.bits() - 1) as i64));
            return ApproxReal::exact(x, prec);
        }
        ApproxReal {
            lo: Dyadic::from_rational(r, prec, Round::Down),
            hi: Dyadic::from_rational(r, prec, Round::Up),
            prec,
        }
    }

    pub fn lower(&self) -> &Dyadic {
        &self.lo
    }

    pub fn upper(&self) -> &Dyadic {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(mut self, prec: u32) -> Self {
        self.prec = prec;
        self
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn midpoint(&self) -> Dyadic {
        Dyadic::midpoint(&self.lo, &self.hi)
    }

    pub fn to_f64(&self) -> f64 {
        self.midpoint().to_f64()
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() <= 0 && self.hi.signum() >= 0
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn overlaps(&self, other: &ApproxReal) -> bool {
        compare(self, other) == Comparison::Indistinguishable
    }

    /// Sign when certified: `Some(-1 | 0 | 1)`; zero only for the exact point 0.
    pub fn certified_sign(&self) -> Option<i32> {
        if self.lo.signum() > 0 {
            Some(1)
        } else if self.hi.signum() < 0 {
            Some(-1)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    pub fn is_certified_nonzero(&self) -> bool {
        !self.contains_zero()
    }

    /// Number of certified leading bits: `floor(log2(min|x| / width))`,
    /// `u32::MAX` for exact values and 0 for intervals straddling zero.
    pub fn precision_bits(&self) -> u32 {
        if self.is_exact() {
            return u32::MAX;
        }
        if self.contains_zero() {
            return 0;
        }
        let mag = if self.lo.signum() > 0 {
            self.lo.clone()
        } else {
            self.hi.abs()
        };
        let w = self.width();
        // floor(log2(m1 2^e1 / (m2 2^e2))) with odd positive mantissas.
        let (m1, e1) = (mag.mantissa().clone(), mag.exponent());
        let (m2, e2) = (w.mantissa().clone(), w.exponent());
        let mut k = bit_len(&m1) as i64 - bit_len(&m2) as i64;
        let lhs = if k >= 0 { m1.clone() } else { &m1 << (-k) as u64 };
        let rhs = if k >= 0 { &m2 << k as u64 } else { m2.clone() };
        if lhs < rhs {
            k -= 1;
        }
        (k + e1 - e2).clamp(0, u32::MAX as i64 - 1) as u32
    }

    fn wrap(&self, other: &ApproxReal, lo: Dyadic, hi: Dyadic) -> ApproxReal {
        let prec = self.prec.max(other.prec);
        ApproxReal {
            lo: lo.round(prec, Round::Down),
            hi: hi.round(prec, Round::Up),
            prec,
        }
    }

    pub fn abs(&self) -> ApproxReal {
        if self.lo.signum() >= 0 {
            self.clone()
        } else if self.hi.signum() <= 0 {
            -self
        } else {
            let hi = self.hi.clone().max(self.lo.abs());
            ApproxReal {
                lo: Dyadic::zero(),
                hi,
                prec: self.prec,
            }
        }
    }

    pub fn max(&self, other: &ApproxReal) -> ApproxReal {
        ApproxReal {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
            prec: self.prec.max(other.prec),
        }
    }

    pub fn min(&self, other: &ApproxReal) -> ApproxReal {
        ApproxReal {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().min(other.hi.clone()),
            prec: self.prec.max(other.prec),
        }
    }

    pub fn recip(&self) -> Result<ApproxReal> {
        ApproxReal::one(self.prec).div(self)
    }

    pub fn div(&self, other: &ApproxReal) -> Result<ApproxReal> {
        if other.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        let prec = self.prec.max(other.prec);
        let cands = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let lo = cands
            .iter()
            .map(|(a, b)| Dyadic::div(a, b, prec, Round::Down))
            .min()
            .unwrap();
        let hi = cands
            .iter()
            .map(|(a, b)| Dyadic::div(a, b, prec, Round::Up))
            .max()
            .unwrap();
        Ok(ApproxReal { lo, hi, prec })
    }

    pub fn mul_int(&self, n: &BigInt) -> ApproxReal {
        self * &ApproxReal::from_int(n.clone(), self.prec)
    }

    /// Multiply by `2^k` (exact).
    pub fn shl(&self, k: i64) -> ApproxReal {
        ApproxReal {
            lo: self.lo.shl(k),
            hi: self.hi.shl(k),
            prec: self.prec,
        }
    }

    /// Floor when both endpoints agree.
    pub fn certified_floor(&self) -> Option<BigInt> {
        let a = self.lo.floor();
        (a == self.hi.floor()).then_some(a)
    }

    /// Smallest integer certainly `>=` every point of the interval.
    pub fn ceil_upper(&self) -> BigInt {
        self.hi.ceil()
    }

    /// Largest integer certainly `<=` every point of the interval.
    pub fn floor_lower(&self) -> BigInt {
        self.lo.floor()
    }

    /// Nearest integer to the midpoint, ties toward negative infinity.
    pub fn round_nearest(&self) -> BigInt {
        let m = self.midpoint();
        m.sub(&Dyadic::new(BigInt::one(), -1)).ceil()
    }

    /// `self <= other` is certain.
    pub fn certainly_le(&self, other: &ApproxReal) -> bool {
        self.hi <= other.lo
    }

    /// `self <= other` is not refuted.
    pub fn possibly_le(&self, other: &ApproxReal) -> bool {
        self.lo <= other.hi
    }

    pub fn pow_u32(&self, n: u32) -> ApproxReal {
        let mut acc = ApproxReal::one(self.prec);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }
}

impl Neg for &ApproxReal {
    type Output = ApproxReal;
    fn neg(self) -> ApproxReal {
        ApproxReal {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
            prec: self.prec,
        }
    }
}

impl Neg for ApproxReal {
    type Output = ApproxReal;
    fn neg(self) -> ApproxReal {
        -&self
    }
}

impl Add for &ApproxReal {
    type Output = ApproxReal;
    fn add(self, other: &ApproxReal) -> ApproxReal {
        self.wrap(other, self.lo.add(&other.lo), self.hi.add(&other.hi))
    }
}

impl Sub for &ApproxReal {
    type Output = ApproxReal;
    fn sub(self, other: &ApproxReal) -> ApproxReal {
        self.wrap(other, self.lo.sub(&other.hi), self.hi.sub(&other.lo))
    }
}

impl Mul for &ApproxReal {
    type Output = ApproxReal;
    fn mul(self, other: &ApproxReal) -> ApproxReal {
        let ps = [
            self.lo.mul(&other.lo),
            self.lo.mul(&other.hi),
            self.hi.mul(&other.lo),
            self.hi.mul(&other.hi),
        ];
        let lo = ps.iter().min().unwrap().clone();
        let hi = ps.iter().max().unwrap().clone();
        self.wrap(other, lo, hi)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for ApproxReal {
            type Output = ApproxReal;
            fn $m(self, other: ApproxReal) -> ApproxReal {
                (&self).$m(&other)
            }
        }
        impl $tr<&ApproxReal> for ApproxReal {
            type Output = ApproxReal;
            fn $m(self, other: &ApproxReal) -> ApproxReal {
                (&self).$m(other)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for ApproxReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Certified enclosure of `floor(v * 2^m) / 2^m` style values.
///
/// `floor_scaled(m)` must return `floor(v * 2^m)` exactly; `exact_at(m)`
/// reports whether `v * 2^m` is an integer. Produces an interval with at
/// least `bits` certified leading bits. Intervals for increasing `bits` are
/// nested because dyadic grids refine.
pub(crate) fn enclose_exact(
    bits: u32,
    is_zero: bool,
    floor_scaled: impl Fn(i64) -> BigInt,
    exact_at: impl Fn(i64) -> bool,
) -> ApproxReal {
    if is_zero {
        return ApproxReal::zero(bits);
    }
    let mut m = bits as i64 + 2;
    loop {
        let n = floor_scaled(m);
        if exact_at(m) {
            return ApproxReal::exact(Dyadic::new(n, -m), bits);
        }
        let next: BigInt = &n + 1;
        let mag = n.abs().min(next.abs());
        let len = bit_len(&mag);
        if len > bits as u64 {
            let lo = Dyadic::new(n, -m);
            let hi = Dyadic::new(next, -m);
            return ApproxReal::from_bounds(lo, hi, bits);
        }
        m += (bits as u64 + 2 - len) as i64;
    }
}

/// `base^exponent` for a positive rational base and rational exponent,
/// enclosed with at least `bits` certified bits.
pub fn pow_rational(base: &BigRational, exponent: &BigRational, bits: u32) -> Result<ApproxReal> {
    if !base.is_positive() {
        return Err(Error::InvalidParameter(
            "pow_rational requires a positive base".into(),
        ));
    }
    let num = exponent.numer();
    let den = exponent.denom();
    let den_u: u32 = den
        .try_into()
        .map_err(|_| Error::InvalidParameter("exponent denominator too large".into()))?;
    let num_abs: u32 = num
        .abs()
        .try_into()
        .map_err(|_| Error::InvalidParameter("exponent numerator too large".into()))?;
    let powered = num_traits::pow(base.clone(), num_abs as usize);
    let (pn, pd) = (powered.numer().clone(), powered.denom().clone());
    // floor((pn/pd)^(1/den) * 2^m) = iroot(floor(pn * 2^(m*den) / pd), den)
    let floor_scaled = |m: i64| -> BigInt {
        let (n, d) = if m >= 0 {
            (&pn << (m as u64 * den_u as u64), pd.clone())
        } else {
            (pn.clone(), &pd << ((-m) as u64 * den_u as u64))
        };
        num_integer::Integer::div_floor(&n, &d).nth_root(den_u)
    };
    let exact_at = |m: i64| -> bool {
        let root = floor_scaled(m);
        let lhs = num_traits::pow(root, den_u as usize);
        if m >= 0 {
            &lhs * &pd == &pn << (m as u64 * den_u as u64)
        } else {
            (&lhs * &pd) << ((-m) as u64 * den_u as u64) == pn
        }
    };
    let guard = bits + 4;
    let pos = enclose_exact(guard, false, floor_scaled, exact_at).with_prec(bits);
    if num.is_negative() {
        pos.recip()
    } else {
        Ok(pos)
    }
}

/// `2^k` as an exact value.
pub fn two_pow(k: i64, prec: u32) -> ApproxReal {
    ApproxReal::exact(Dyadic::new(BigInt::one(), k), prec)
}
