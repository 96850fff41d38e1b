//! Textual real-number inputs: `rat:n/d`, `surd:(a+b*sqrt(d))/c`, `dec:<digits>@<bits>`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::approx::{enclose_exact, ApproxReal};
use super::dyadic::{Dyadic, Round};
use super::quad::{is_perfect_square, Quad};
use crate::error::{Error, Result};

/// Smallest admissible `valid_bits` of a decimal literal.
pub const MIN_VALID_BITS: u32 = 16;

/// A decimal literal together with how many leading bits of it are trusted.
///
/// The true value lies within a relative `2^-(valid_bits + 2)` of the
/// literal, so its enclosure certifies `valid_bits` leading bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecimalLiteral {
    digits: String,
    value: BigRational,
    valid_bits: u32,
}

impl DecimalLiteral {
    pub fn digits(&self) -> &str {
        &self.digits
    }
    pub fn value(&self) -> &BigRational {
        &self.value
    }
    pub fn valid_bits(&self) -> u32 {
        self.valid_bits
    }
}

/// Exact or precision-tagged input real.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealSpec {
    Rational(BigRational),
    QuadraticSurd(Quad),
    Decimal(DecimalLiteral),
}

fn invalid(s: &str, why: &str) -> Error {
    Error::InvalidSpec(s.to_string(), why.to_string())
}

fn parse_int(s: &str, whole: &str) -> Result<BigInt> {
    let t = s.trim();
    let t = t.strip_prefix('+').unwrap_or(t);
    BigInt::from_str(t).map_err(|_| invalid(whole, &format!("`{s}` is not an integer")))
}

/// Exact value of a plain decimal numeral such as `-12.0625`.
pub fn parse_decimal_exact(s: &str) -> Option<BigRational> {
    let t = s.trim();
    let (neg, body) = match t.as_bytes().first()? {
        b'-' => (true, &t[1..]),
        b'+' => (false, &t[1..]),
        _ => (false, t),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|c| c.is_ascii_digit()) || !frac_part.bytes().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let all = format!("{int_part}{frac_part}");
    let n = if all.is_empty() {
        BigInt::zero()
    } else {
        BigInt::from_str(&all).ok()?
    };
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let v = BigRational::new(n, den);
    Some(if neg { -v } else { v })
}

fn parse_rational_body(body: &str, whole: &str) -> Result<BigRational> {
    match body.split_once('/') {
        Some((n, d)) => {
            let n = parse_int(n, whole)?;
            let d = parse_int(d, whole)?;
            if d.is_zero() {
                return Err(invalid(whole, "zero denominator"));
            }
            Ok(BigRational::new(n, d))
        }
        None => parse_decimal_exact(body).ok_or_else(|| invalid(whole, "not a rational numeral")),
    }
}

fn parse_surd_body(body: &str, whole: &str) -> Result<Quad> {
    let body: String = body.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || invalid(whole, "expected (a+b*sqrt(d))/c");
    let inner_end = body.rfind(')').ok_or_else(err)?;
    if !body.starts_with('(') {
        return Err(err());
    }
    let inner = &body[1..inner_end];
    let rest = &body[inner_end + 1..];
    let c = match rest.strip_prefix('/') {
        Some(c) => parse_int(c, whole)?,
        None if rest.is_empty() => BigInt::one(),
        None => return Err(err()),
    };
    let sq = inner.find("sqrt(").ok_or_else(err)?;
    let d_str = inner[sq + 5..].strip_suffix(')').ok_or_else(err)?;
    let d = parse_int(d_str, whole)?;
    let head = &inner[..sq];
    let head = head.strip_suffix('*').unwrap_or(head);
    // head is `a+b`, `a-b`, `a+-b`; split at the last sign that is not leading
    let split = head
        .char_indices()
        .skip(1)
        .filter(|&(i, ch)| {
            (ch == '+' || ch == '-') && !matches!(head.as_bytes()[i - 1], b'+' | b'-')
        })
        .map(|(i, _)| i)
        .last()
        .ok_or_else(err)?;
    let a = parse_int(&head[..split], whole)?;
    let b_str = &head[split..];
    let b = match b_str {
        "+" => BigInt::one(),
        "-" => -BigInt::one(),
        _ => {
            let (sign, rest) = b_str.split_at(1);
            let v = parse_int(rest, whole)?;
            if sign == "-" {
                -v
            } else {
                v
            }
        }
    };
    if c.is_zero() {
        return Err(invalid(whole, "c must be nonzero"));
    }
    if d.is_negative() {
        return Err(invalid(whole, "d must be non-negative"));
    }
    if !b.is_zero() && is_perfect_square(&d) {
        return Err(invalid(whole, "d must not be a perfect square"));
    }
    Quad::new(a, b, c, d).ok_or_else(err)
}

impl FromStr for RealSpec {
    type Err = Error;

    /// Parses the three tagged forms; an untagged numeral (`3/4`, `-0.25`)
    /// is accepted as an exact rational.
    fn from_str(s: &str) -> Result<RealSpec> {
        let t = s.trim();
        if let Some(body) = t.strip_prefix("rat:") {
            return Ok(RealSpec::Rational(parse_rational_body(body, s)?));
        }
        if let Some(body) = t.strip_prefix("surd:") {
            let q = parse_surd_body(body, s)?;
            return Ok(RealSpec::from_quad(q));
        }
        if let Some(body) = t.strip_prefix("dec:") {
            let (digits, bits) = body
                .split_once('@')
                .ok_or_else(|| invalid(s, "expected dec:<digits>@<valid_bits>"))?;
            let value =
                parse_decimal_exact(digits).ok_or_else(|| invalid(s, "malformed decimal digits"))?;
            let valid_bits: u32 = bits
                .trim()
                .parse()
                .map_err(|_| invalid(s, "valid_bits is not a positive integer"))?;
            if valid_bits < MIN_VALID_BITS {
                return Err(invalid(s, "valid_bits must be at least 16"));
            }
            return Ok(RealSpec::Decimal(DecimalLiteral {
                digits: digits.trim().to_string(),
                value,
                valid_bits,
            }));
        }
        Ok(RealSpec::Rational(parse_rational_body(t, s)?))
    }
}

impl fmt::Display for RealSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealSpec::Rational(r) => write!(f, "rat:{}/{}", r.numer(), r.denom()),
            RealSpec::QuadraticSurd(q) => write!(f, "surd:{q}"),
            RealSpec::Decimal(d) => write!(f, "dec:{}@{}", d.digits, d.valid_bits),
        }
    }
}

impl RealSpec {
    pub fn int(n: i64) -> RealSpec {
        RealSpec::Rational(BigRational::from_integer(n.into()))
    }

    pub fn rational(n: i64, d: i64) -> RealSpec {
        RealSpec::Rational(BigRational::new(n.into(), d.into()))
    }

    /// Rational when `q` has no surd part.
    pub fn from_quad(q: Quad) -> RealSpec {
        match q.to_rational() {
            Some(r) => RealSpec::Rational(r),
            None => RealSpec::QuadraticSurd(q),
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, RealSpec::Decimal(_))
    }

    /// Exact field element for rational and surd specs.
    pub fn as_quad(&self) -> Option<Quad> {
        match self {
            RealSpec::Rational(r) => Some(Quad::from_rational(r)),
            RealSpec::QuadraticSurd(q) => Some(q.clone()),
            RealSpec::Decimal(_) => None,
        }
    }

    /// Bits this spec can certify: unbounded for exact specs.
    pub fn available_bits(&self) -> u32 {
        match self {
            RealSpec::Decimal(d) => d.valid_bits,
            _ => u32::MAX,
        }
    }

    /// Exactly zero (decimals count as zero only when the literal is 0).
    pub fn is_zero(&self) -> bool {
        match self {
            RealSpec::Rational(r) => r.is_zero(),
            RealSpec::QuadraticSurd(q) => q.is_zero(),
            RealSpec::Decimal(d) => d.value.is_zero(),
        }
    }

    /// Enclosure agreeing with the represented real to `requested_bits`
    /// leading bits.
    pub fn eval(&self, requested_bits: u32) -> Result<ApproxReal> {
        if requested_bits < MIN_VALID_BITS {
            return Err(Error::InvalidParameter(format!(
                "requested_bits must be at least {MIN_VALID_BITS}"
            )));
        }
        match self {
            RealSpec::Rational(r) => Ok(eval_rational(r, requested_bits)),
            RealSpec::QuadraticSurd(q) => Ok(q.eval(requested_bits)),
            RealSpec::Decimal(d) => {
                if requested_bits > d.valid_bits {
                    return Err(Error::PrecisionExhausted {
                        requested: requested_bits,
                        available: d.valid_bits,
                    });
                }
                Ok(eval_decimal(d, requested_bits))
            }
        }
    }

    /// Like [`RealSpec::eval`] but caps the request at what the spec can
    /// supply; the result carries its real certified width.
    pub fn eval_capped(&self, requested_bits: u32) -> ApproxReal {
        let bits = requested_bits.max(MIN_VALID_BITS).min(self.available_bits());
        self.eval(bits)
            .expect("capped request is always satisfiable")
            .with_prec(requested_bits.max(MIN_VALID_BITS))
    }
}

fn eval_rational(r: &BigRational, bits: u32) -> ApproxReal {
    let n = r.numer();
    let d = r.denom();
    enclose_exact(
        bits,
        r.is_zero(),
        |m| {
            if m >= 0 {
                num_integer::Integer::div_floor(&(n << m as u64), d)
            } else {
                num_integer::Integer::div_floor(n, &(d << (-m) as u64))
            }
        },
        |m| {
            if m >= 0 {
                num_integer::Integer::is_multiple_of(&(n << m as u64), d)
            } else {
                num_integer::Integer::is_multiple_of(n, &(d << (-m) as u64))
            }
        },
    )
}

fn eval_decimal(d: &DecimalLiteral, bits: u32) -> ApproxReal {
    if d.value.is_zero() {
        return ApproxReal::zero(bits);
    }
    let radius = d.value.abs() / BigRational::from_integer(BigInt::one() << (d.valid_bits as u64 + 2));
    let grid = d.valid_bits + 8;
    let lo = Dyadic::from_rational(&(&d.value - &radius), grid, Round::Down);
    let hi = Dyadic::from_rational(&(&d.value + &radius), grid, Round::Up);
    ApproxReal::from_bounds(lo, hi, bits)
}
