//! Exact binary floating values `mant * 2^exp` with directed rounding.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Rounding direction for operations that cannot be exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

/// A dyadic rational `mant * 2^exp`, kept normalized (odd mantissa or zero).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

pub(crate) fn bit_len(n: &BigInt) -> u64 {
    n.bits()
}

pub(crate) fn pow2(k: u64) -> BigInt {
    BigInt::one() << k
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        if mant.is_zero() {
            return Dyadic::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        if tz == 0 {
            Dyadic { mant, exp }
        } else {
            Dyadic {
                mant: mant >> tz,
                exp: exp + tz as i64,
            }
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn from_int(n: BigInt) -> Self {
        Dyadic::new(n, 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    fn aligned(&self, other: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        (a, b, e)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b, e) = self.aligned(other);
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    /// Multiply by `2^k`.
    pub fn shl(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    /// Round to at most `bits` significant bits in direction `dir`.
    pub fn round(&self, bits: u32, dir: Round) -> Dyadic {
        let len = bit_len(&self.mant);
        if len <= bits as u64 {
            return self.clone();
        }
        let shift = len - bits as u64;
        let m = floor_shift(&self.mant, shift, dir);
        Dyadic::new(m, self.exp + shift as i64)
    }

    /// `a / b` rounded to `bits` significant bits in direction `dir`.
    ///
    /// Panics when `b` is zero.
    pub fn div(a: &Dyadic, b: &Dyadic, bits: u32, dir: Round) -> Dyadic {
        assert!(!b.is_zero(), "dyadic division by zero");
        if a.is_zero() {
            return Dyadic::zero();
        }
        let s = (bits as i64 + 2 + bit_len(&b.mant) as i64 - bit_len(&a.mant) as i64).max(0) as u64;
        let num = &a.mant << s;
        let (q, rem) = num.div_mod_floor(&b.mant);
        let q = if dir == Round::Up && !rem.is_zero() {
            q + 1
        } else {
            q
        };
        Dyadic::new(q, a.exp - b.exp - s as i64).round(bits, dir)
    }

    /// Directed rounding of an exact rational to `bits` significant bits.
    pub fn from_rational(r: &BigRational, bits: u32, dir: Round) -> Dyadic {
        let a = Dyadic::from_int(r.numer().clone());
        let b = Dyadic::from_int(r.denom().clone());
        Dyadic::div(&a, &b, bits, dir)
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            floor_shift(&self.mant, (-self.exp) as u64, Round::Down)
        }
    }

    pub fn ceil(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            floor_shift(&self.mant, (-self.exp) as u64, Round::Up)
        }
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as u64)
        } else {
            BigRational::new(self.mant.clone(), pow2((-self.exp) as u64))
        }
    }

    /// `floor(log2 |self|)`; `None` for zero.
    pub fn floor_log2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exp + bit_len(&self.mant) as i64 - 1)
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let len = bit_len(&self.mant) as i64;
        let (m, e) = if len > 64 {
            (&self.mant >> (len - 64) as u64, self.exp + len - 64)
        } else {
            (self.mant.clone(), self.exp)
        };
        let mf = m.to_f64().unwrap_or(f64::NAN);
        if e > i32::MAX as i64 {
            return mf.signum() * f64::INFINITY;
        }
        if e < i32::MIN as i64 {
            return 0.0;
        }
        mf * 2f64.powi(e.clamp(-1100, 1100) as i32)
    }

    /// `(a + b) / 2`, exact.
    pub fn midpoint(a: &Dyadic, b: &Dyadic) -> Dyadic {
        a.add(b).shl(-1)
    }
}

fn floor_shift(m: &BigInt, shift: u64, dir: Round) -> BigInt {
    let d = pow2(shift);
    let (q, r) = m.div_mod_floor(&d);
    if dir == Round::Up && !r.is_zero() {
        q + 1
    } else {
        q
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}
