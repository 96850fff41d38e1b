//! The box-constrained determinant equation `xy - zw = 1`.
//!
//! Each unknown is confined to an integer interval derived from a real
//! center and half-width `R = Q^r`. Two backends solve it: a constructive
//! one that takes `w` prime and inverts `x` modulo `w`, and an exhaustive
//! scan used as an oracle and as a fallback on small instances.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::ApproxReal;
use crate::error::{Error, Result};
use crate::primes::{mod_inverse, primes_in};

/// Closed integer interval `[lo, hi]`; empty when `lo > hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntInterval {
    pub lo: BigInt,
    pub hi: BigInt,
}

impl IntInterval {
    pub fn new(lo: impl Into<BigInt>, hi: impl Into<BigInt>) -> IntInterval {
        IntInterval {
            lo: lo.into(),
            hi: hi.into(),
        }
    }

    /// Integers certainly within `half` of every point of `center`.
    pub fn around(center: &ApproxReal, half: &BigInt) -> IntInterval {
        IntInterval {
            lo: center.upper().ceil() - half,
            hi: center.lower().floor() + half,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn count(&self) -> BigInt {
        if self.is_empty() {
            BigInt::zero()
        } else {
            &self.hi - &self.lo + 1
        }
    }

    pub fn contains(&self, x: &BigInt) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn intersect(&self, o: &IntInterval) -> IntInterval {
        IntInterval {
            lo: (&self.lo).max(&o.lo).clone(),
            hi: (&self.hi).min(&o.hi).clone(),
        }
    }

    pub fn negate(&self) -> IntInterval {
        IntInterval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    /// `floor((lo + hi) / 2)`.
    pub fn center(&self) -> BigInt {
        (&self.lo + &self.hi).div_floor(&BigInt::from(2))
    }

    /// Members ordered by distance from the center, lower side first on ties.
    pub fn center_out(&self) -> impl Iterator<Item = BigInt> {
        let c = self.center();
        let iv = self.clone();
        let mut k = BigInt::zero();
        let mut side = 0u8;
        std::iter::from_fn(move || loop {
            let below = &c - &k;
            let above = &c + &k;
            if below < iv.lo && above > iv.hi {
                return None;
            }
            let cand = match side {
                0 => {
                    side = if k.is_zero() { 2 } else { 1 };
                    below
                }
                1 => {
                    side = 2;
                    above
                }
                _ => {
                    side = 0;
                    k += 1;
                    continue;
                }
            };
            if iv.contains(&cand) {
                return Some(cand);
            }
        })
    }
}

impl fmt::Display for IntInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// How the four unknowns are tied to the centers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairing {
    /// `x ~ A1`, `y ~ A2`, `z ~ B1`, `w ~ B2`.
    Literal,
    /// Lattice orientation: the points `(x, z)` and `(y', w')` with
    /// `x w' - z y' = s` are encoded as `y = s w'`, `w = s y'`, so that
    /// `xy - zw = 1`. Then `y ~ s B2` and `w ~ s A2`.
    Basis { s: i32 },
}

/// An instance of `xy - zw = 1` with interval constraints.
#[derive(Clone, Debug)]
pub struct BoxDetProblem {
    pub a1: ApproxReal,
    pub b1: ApproxReal,
    /// Signed ratio with `A2 = sigma A1`, `B2 = sigma B1`.
    pub sigma: ApproxReal,
    pub q: BigRational,
    pub r: BigRational,
    /// `floor(Q^r)`.
    pub half_width: BigInt,
    pub pairing: Pairing,
    pub x: IntInterval,
    pub y: IntInterval,
    pub z: IntInterval,
    pub w: IntInterval,
}

/// `floor(q^r)` for positive rational `q` and `r`, exact.
pub fn floor_pow(q: &BigRational, r: &BigRational) -> Result<BigInt> {
    if !q.is_positive() || !r.is_positive() {
        return Err(Error::InvalidParameter("Q and r must be positive".into()));
    }
    let n = r
        .numer()
        .to_u32()
        .ok_or_else(|| Error::InvalidParameter("exponent numerator too large".into()))?;
    let d = r
        .denom()
        .to_u32()
        .ok_or_else(|| Error::InvalidParameter("exponent denominator too large".into()))?;
    let powered = num_traits::pow(q.clone(), n as usize);
    // floor(x^(1/d)) = iroot(floor(x), d) for x >= 0
    Ok(powered.floor().to_integer().nth_root(d))
}

impl BoxDetProblem {
    pub fn new(
        a1: ApproxReal,
        b1: ApproxReal,
        sigma: ApproxReal,
        q: BigRational,
        r: BigRational,
        pairing: Pairing,
    ) -> Result<BoxDetProblem> {
        if !(r.is_positive() && r < BigRational::one()) {
            return Err(Error::InvalidParameter(format!("r = {r} is outside (0, 1)")));
        }
        let half = floor_pow(&q, &r)?;
        let a2 = &sigma * &a1;
        let b2 = &sigma * &b1;
        let x = IntInterval::around(&a1, &half);
        let z = IntInterval::around(&b1, &half);
        let (y, w) = match pairing {
            Pairing::Literal => (IntInterval::around(&a2, &half), IntInterval::around(&b2, &half)),
            Pairing::Basis { s } => {
                let (yc, wc) = if s > 0 { (b2, a2) } else { (-b2, -a2) };
                (IntInterval::around(&yc, &half), IntInterval::around(&wc, &half))
            }
        };
        Ok(BoxDetProblem {
            a1,
            b1,
            sigma,
            q,
            r,
            half_width: half,
            pairing,
            x,
            y,
            z,
            w,
        })
    }

    /// The literal form with `A2 = -rho A1`, `B2 = -rho B1`.
    pub fn literal(a1: ApproxReal, b1: ApproxReal, rho: ApproxReal, q: BigRational, r: BigRational) -> Result<BoxDetProblem> {
        BoxDetProblem::new(a1, b1, -rho, q, r, Pairing::Literal)
    }

    /// A problem given directly by its four intervals.
    pub fn from_intervals(x: IntInterval, y: IntInterval, z: IntInterval, w: IntInterval) -> BoxDetProblem {
        let p = 64;
        BoxDetProblem {
            a1: ApproxReal::zero(p),
            b1: ApproxReal::zero(p),
            sigma: ApproxReal::zero(p),
            q: BigRational::one(),
            r: BigRational::new(4.into(), 5.into()),
            half_width: BigInt::zero(),
            pairing: Pairing::Literal,
            x,
            y,
            z,
            w,
        }
    }

    /// `rho = |sigma|`.
    pub fn rho(&self) -> ApproxReal {
        self.sigma.abs()
    }

    /// Same problem with the `x` and `z` windows narrowed.
    pub fn restricted(&self, x: &IntInterval, z: &IntInterval) -> BoxDetProblem {
        BoxDetProblem {
            x: self.x.intersect(x),
            z: self.z.intersect(z),
            ..self.clone()
        }
    }

    pub fn is_solution(&self, s: &BoxDetSolution) -> bool {
        &s.x * &s.y - &s.z * &s.w == BigInt::one()
            && self.x.contains(&s.x)
            && self.y.contains(&s.y)
            && self.z.contains(&s.z)
            && self.w.contains(&s.w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolvedBy {
    Constructive,
    Exhaustive,
}

impl fmt::Display for SolvedBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolvedBy::Constructive => "constructive",
            SolvedBy::Exhaustive => "exhaustive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxDetSolution {
    pub x: BigInt,
    pub y: BigInt,
    pub z: BigInt,
    pub w: BigInt,
    pub backend: SolvedBy,
}

impl BoxDetSolution {
    /// Undo the [`Pairing::Basis`] encoding: returns `(x, y', z, w')`
    /// with `x w' - z y' = s`.
    pub fn lattice_coordinates(&self, s: i32) -> (BigInt, BigInt, BigInt, BigInt) {
        let s = BigInt::from(s);
        (self.x.clone(), &s * &self.w, self.z.clone(), &s * &self.y)
    }
}

/// Backend selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    Exhaustive,
    Constructive,
    #[default]
    Auto,
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Backend> {
        match s {
            "exhaustive" => Ok(Backend::Exhaustive),
            "constructive" => Ok(Backend::Constructive),
            "auto" => Ok(Backend::Auto),
            _ => Err(Error::InvalidParameter(format!("unknown backend `{s}`"))),
        }
    }
}

/// Guard on `|I_x| * |I_z|` for the exhaustive scan.
pub const EXHAUSTIVE_GUARD: u64 = 100_000_000;

/// Default bound on `x` candidates tried by the constructive backend.
pub const CONSTRUCTIVE_BUDGET: u64 = 200_000;

/// Dispatch to a backend. `Auto` tries the constructive backend first and
/// falls back to the exhaustive scan; it reports `None` when neither finds
/// a solution (including when the scan is over its guard).
pub fn solve(p: &BoxDetProblem, backend: Backend) -> Result<Option<BoxDetSolution>> {
    match backend {
        Backend::Exhaustive => solve_exhaustive(p),
        Backend::Constructive => solve_constructive(p, CONSTRUCTIVE_BUDGET),
        Backend::Auto => {
            match solve_constructive(p, CONSTRUCTIVE_BUDGET) {
                Ok(Some(s)) => return Ok(Some(s)),
                Ok(None) | Err(Error::NoPrimeInInterval { .. }) => {}
                Err(e) => return Err(e),
            }
            match solve_exhaustive(p) {
                Err(Error::TooLarge { .. }) => Ok(None),
                other => other,
            }
        }
    }
}

/// Exhaustive scan: `x` ascending, then `z` ascending over pairs with
/// `gcd(x, z) = 1`; for each pair the solutions of `xy - zw = 1` form the
/// line `(y0 + kz, w0 + kx)` and the smallest admissible `k` is taken.
/// Returns a solution iff one exists.
pub fn solve_exhaustive(p: &BoxDetProblem) -> Result<Option<BoxDetSolution>> {
    let ivs = [&p.x, &p.y, &p.z, &p.w];
    if ivs.iter().any(|iv| iv.is_empty()) {
        return Ok(None);
    }
    let candidates = p.x.count() * p.z.count();
    let too_large = || Error::TooLarge {
        candidates: candidates.to_string(),
        guard: EXHAUSTIVE_GUARD,
    };
    if candidates > BigInt::from(EXHAUSTIVE_GUARD) {
        return Err(too_large());
    }
    let small = |b: &BigInt| b.to_i64().map(i128::from).ok_or_else(too_large);
    let (xl, xh) = (small(&p.x.lo)?, small(&p.x.hi)?);
    let (yl, yh) = (small(&p.y.lo)?, small(&p.y.hi)?);
    let (zl, zh) = (small(&p.z.lo)?, small(&p.z.hi)?);
    let (wl, wh) = (small(&p.w.lo)?, small(&p.w.hi)?);
    for x in xl..=xh {
        for z in zl..=zh {
            let e = x.extended_gcd(&z);
            if e.gcd != 1 {
                continue;
            }
            // x * a + z * b = 1  =>  y0 = a, w0 = -b
            let (y0, w0) = (e.x, -e.y);
            let Some((klo, khi)) = k_range(y0, z, yl, yh).and_then(|(a, b)| {
                let (c, d) = k_range(w0, x, wl, wh)?;
                Some((a.max(c), b.min(d)))
            }) else {
                continue;
            };
            if klo > khi {
                continue;
            }
            // One of x, z is nonzero, so the range is bounded below.
            let k = klo;
            let y = y0 + k * z;
            let w = w0 + k * x;
            return Ok(Some(BoxDetSolution {
                x: x.into(),
                y: y.into(),
                z: z.into(),
                w: w.into(),
                backend: SolvedBy::Exhaustive,
            }));
        }
    }
    Ok(None)
}

/// Integers `k` with `lo <= v0 + k * step <= hi`, as `(kmin, kmax)` with
/// `i128::MIN`/`i128::MAX` standing for unbounded; `None` when empty.
fn k_range(v0: i128, step: i128, lo: i128, hi: i128) -> Option<(i128, i128)> {
    if step == 0 {
        return (lo <= v0 && v0 <= hi).then_some((i128::MIN, i128::MAX));
    }
    let (a, b) = if step > 0 {
        (ceil_div(lo - v0, step), Integer::div_floor(&(hi - v0), &step))
    } else {
        (ceil_div(hi - v0, step), Integer::div_floor(&(lo - v0), &step))
    };
    (a <= b).then_some((a, b))
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -Integer::div_floor(&-a, &b)
}

/// Constructive backend: `w = +-p` for primes `p` taken in ascending order
/// (positive `w` first), `x` from the center of its interval outward,
/// `y` the least lift of `x^-1 mod p` whose `z = (xy - 1)/w` lands in the
/// `z` interval. At most `budget` values of `x` are tried in total.
pub fn solve_constructive(p: &BoxDetProblem, budget: u64) -> Result<Option<BoxDetSolution>> {
    if [&p.x, &p.y, &p.z, &p.w].iter().any(|iv| iv.is_empty()) {
        return Ok(None);
    }
    let two = BigInt::from(2);
    let pos = IntInterval::new(p.w.lo.clone().max(two.clone()), p.w.hi.clone());
    let neg = IntInterval::new((-&p.w.hi).max(two), -&p.w.lo);
    let mut ws = primes_in(&pos.lo, &pos.hi)
        .chain(primes_in(&neg.lo, &neg.hi).map(|q| -q))
        .peekable();
    if ws.peek().is_none() {
        return Err(Error::NoPrimeInInterval {
            lo: p.w.lo.to_string(),
            hi: p.w.hi.to_string(),
        });
    }
    let mut steps = 0u64;
    for w in ws {
        let modulus = w.abs();
        // xy - 1 = zw with z in [zlo, zhi]
        let (e1, e2) = (&w * &p.z.lo + 1, &w * &p.z.hi + 1);
        let (lo_xy, hi_xy) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        for x in p.x.center_out() {
            steps += 1;
            if steps > budget {
                return Ok(None);
            }
            if x.is_zero() {
                continue;
            }
            let Some(y0) = mod_inverse(&x, &modulus) else {
                continue;
            };
            let yr = if x.is_positive() {
                IntInterval::new(ceil_big(&lo_xy, &x), hi_xy.div_floor(&x))
            } else {
                IntInterval::new(ceil_big(&hi_xy, &x), lo_xy.div_floor(&x))
            };
            let yr = yr.intersect(&p.y);
            if yr.is_empty() {
                continue;
            }
            let y = &yr.lo + (&y0 - &yr.lo).mod_floor(&modulus);
            if y > yr.hi {
                continue;
            }
            let z = (&x * &y - 1u32) / &w;
            let s = BoxDetSolution {
                x,
                y,
                z,
                w: w.clone(),
                backend: SolvedBy::Constructive,
            };
            debug_assert!(p.is_solution(&s));
            return Ok(Some(s));
        }
    }
    Ok(None)
}

fn ceil_big(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}
