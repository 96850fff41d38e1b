//! Continued-fraction expansion of `beta / delta` and its convergents.
//!
//! Convergents follow the usual recurrence `p_k = a_k p_{k-1} + p_{k-2}` with
//! `p_0 / q_0 = a_0 / 1`, which makes
//! `q_nu * p_{nu+1} - q_{nu+1} * p_nu = (-1)^nu` for every `nu`.
//!
//! Three expansion engines are used depending on the inputs:
//! * exact quadratic irrationals run the periodic `(P + sqrt(D)) / Q`
//!   recurrence on integers and never lose precision;
//! * exact rationals run Euclid's algorithm (and are rejected when the
//!   irrationality hypothesis is in force);
//! * anything else (decimal literals, surds from different fields) is
//!   enclosed in an interval and only the partial quotients shared by both
//!   endpoints are emitted. Continued-fraction cylinders are intervals, so
//!   that common prefix is correct for every real in between.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{ApproxReal, Quad, RealSpec};
use crate::error::{Error, Result};

/// One convergent `p / q` with its index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub nu: usize,
    pub p: BigInt,
    pub q: BigInt,
}

impl Convergent {
    /// `(-1)^nu` as an integer.
    pub fn parity_sign(&self) -> i32 {
        if self.nu.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

/// `q_a * p_b - q_b * p_a` for two convergents.
pub fn neighbor_determinant(a: &Convergent, b: &Convergent) -> BigInt {
    &a.q * &b.p - &b.q * &a.p
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpandMode {
    /// Reject rational ratios (the construction needs `beta/delta` irrational).
    Irrational,
    /// Allow finite expansions of rational ratios.
    AllowRational,
}

#[derive(Clone, Debug)]
enum Engine {
    /// State `(P + sqrt(D)) / Q` with `Q | D - P^2`.
    Surd { p: BigInt, q: BigInt, d: BigInt },
    /// Euclid on `num / den`; `den == 0` once finished.
    Rational { num: BigInt, den: BigInt },
    /// Certified common prefix of the endpoint expansions.
    Interval { bits: u32, exact_inputs: bool },
}

/// Lazily expanded continued fraction of `beta / delta`.
#[derive(Clone, Debug)]
pub struct CfStream {
    beta: RealSpec,
    delta: RealSpec,
    engine: Engine,
    exact_ratio: Option<Quad>,
    quotients: Vec<BigInt>,
    convergents: Vec<Convergent>,
    surd_states: Vec<(BigInt, BigInt)>,
}

const INTERVAL_START_BITS: u32 = 256;
const INTERVAL_MAX_BITS: u32 = 1 << 16;

impl CfStream {
    pub fn new(beta: &RealSpec, delta: &RealSpec, mode: ExpandMode) -> Result<CfStream> {
        if delta.is_zero() {
            return Err(Error::DeltaZero);
        }
        let exact_ratio = match (beta.as_quad(), delta.as_quad()) {
            (Some(b), Some(d)) => b.div(&d),
            _ => None,
        };
        let engine = match &exact_ratio {
            Some(x) if x.is_rational() => {
                if mode == ExpandMode::Irrational {
                    return Err(Error::RationalRatio);
                }
                Engine::Rational {
                    num: x.a().clone(),
                    den: x.c().clone(),
                }
            }
            Some(x) => surd_engine(x),
            None => {
                let delta_iv = delta.eval_capped(64);
                if delta_iv.contains_zero() && !delta.is_exact() {
                    return Err(Error::DeltaZero);
                }
                Engine::Interval {
                    bits: INTERVAL_START_BITS.min(beta.available_bits()).min(delta.available_bits()),
                    exact_inputs: beta.is_exact() && delta.is_exact(),
                }
            }
        };
        Ok(CfStream {
            beta: beta.clone(),
            delta: delta.clone(),
            engine,
            exact_ratio,
            quotients: Vec::new(),
            convergents: Vec::new(),
            surd_states: Vec::new(),
        })
    }

    pub fn beta(&self) -> &RealSpec {
        &self.beta
    }

    pub fn delta(&self) -> &RealSpec {
        &self.delta
    }

    /// The ratio as an exact field element, when the inputs allow it.
    pub fn exact_ratio(&self) -> Option<&Quad> {
        self.exact_ratio.as_ref()
    }

    /// Enclosure of `beta / delta` with at least `bits` certified bits
    /// (fewer when decimal inputs cannot supply them).
    pub fn ratio(&self, bits: u32) -> Result<ApproxReal> {
        if let Some(x) = &self.exact_ratio {
            return Ok(x.eval(bits));
        }
        let b = self.beta.eval_capped(bits + 8);
        let d = self.delta.eval_capped(bits + 8);
        b.div(&d)
    }

    pub fn quotients(&self) -> &[BigInt] {
        &self.quotients
    }

    pub fn convergents(&self) -> &[Convergent] {
        &self.convergents
    }

    pub fn len(&self) -> usize {
        self.convergents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.convergents.is_empty()
    }

    /// Whether the expansion has terminated (rational ratio).
    pub fn is_finished(&self) -> bool {
        matches!(&self.engine, Engine::Rational { den, .. } if den.is_zero())
    }

    /// Expand until at least `count` convergents exist. Rational ratios
    /// stop early at their last convergent.
    pub fn ensure(&mut self, count: usize) -> Result<()> {
        while self.quotients.len() < count {
            if self.is_finished() {
                break;
            }
            if let Engine::Interval { .. } = self.engine {
                self.extend_interval(count)?;
                break;
            }
            let a = self.next_exact_quotient();
            if let Some(a) = a {
                self.push_quotient(a);
            }
        }
        Ok(())
    }

    pub fn convergent(&self, nu: usize) -> Result<&Convergent> {
        self.convergents.get(nu).ok_or(Error::OutOfRange {
            nu,
            available: self.convergents.len(),
        })
    }

    /// `(C_nu, C_{nu+1})`, both already expanded.
    pub fn convergent_pair(&self, nu: usize) -> Result<(Convergent, Convergent)> {
        if nu + 1 >= self.convergents.len() {
            return Err(Error::OutOfRange {
                nu,
                available: self.convergents.len(),
            });
        }
        Ok((self.convergents[nu].clone(), self.convergents[nu + 1].clone()))
    }

    fn push_quotient(&mut self, a: BigInt) {
        let k = self.quotients.len();
        let (p, q) = match k {
            0 => (a.clone(), BigInt::one()),
            1 => {
                let c0 = &self.convergents[0];
                (&a * &c0.p + BigInt::one(), a.clone())
            }
            _ => {
                let c1 = &self.convergents[k - 1];
                let c2 = &self.convergents[k - 2];
                (&a * &c1.p + &c2.p, &a * &c1.q + &c2.q)
            }
        };
        self.quotients.push(a);
        self.convergents.push(Convergent { nu: k, p, q });
    }

    fn next_exact_quotient(&mut self) -> Option<BigInt> {
        match &mut self.engine {
            Engine::Surd { p, q, d } => {
                self.surd_states.push((p.clone(), q.clone()));
                let a = Quad::new(p.clone(), BigInt::one(), q.clone(), d.clone())
                    .expect("surd state has nonzero Q")
                    .floor();
                let p_next = &a * &*q - &*p;
                let q_next = (&*d - &p_next * &p_next) / &*q;
                *p = p_next;
                *q = q_next;
                Some(a)
            }
            Engine::Rational { num, den } => {
                if den.is_zero() {
                    return None;
                }
                let (a, r) = num.div_mod_floor(den);
                *num = std::mem::replace(den, r);
                Some(a)
            }
            Engine::Interval { .. } => None,
        }
    }

    fn extend_interval(&mut self, count: usize) -> Result<()> {
        loop {
            let (bits, exact_inputs) = match self.engine {
                Engine::Interval { bits, exact_inputs } => (bits, exact_inputs),
                _ => unreachable!(),
            };
            let x = self.ratio_at(bits)?;
            let prefix = certified_prefix(&x, count);
            if prefix.len() >= count || !exact_inputs || bits >= INTERVAL_MAX_BITS {
                for a in prefix.into_iter().skip(self.quotients.len()) {
                    self.push_quotient(a);
                }
                if self.quotients.len() < count {
                    let available = self.beta.available_bits().min(self.delta.available_bits());
                    return Err(Error::PrecisionExhausted {
                        requested: bits.saturating_mul(2).min(INTERVAL_MAX_BITS),
                        available,
                    });
                }
                return Ok(());
            }
            self.engine = Engine::Interval {
                bits: bits * 2,
                exact_inputs,
            };
        }
    }

    fn ratio_at(&self, bits: u32) -> Result<ApproxReal> {
        let b = self.beta.eval_capped(bits);
        let d = self.delta.eval_capped(bits);
        b.div(&d).map_err(|_| Error::DeltaZero)
    }

    /// For quadratic-irrational ratios: `(preperiod, period)` of the
    /// partial-quotient sequence, found by detecting a repeated
    /// `(P, Q)` state within the first `max_terms` quotients.
    pub fn detect_period(&mut self, max_terms: usize) -> Result<Option<(Vec<BigInt>, Vec<BigInt>)>> {
        if !matches!(self.engine, Engine::Surd { .. }) {
            return Ok(None);
        }
        self.ensure(max_terms)?;
        let mut seen: HashMap<&(BigInt, BigInt), usize> = HashMap::new();
        for (i, st) in self.surd_states.iter().enumerate() {
            if let Some(&j) = seen.get(st) {
                let pre = self.quotients[..j].to_vec();
                let per = self.quotients[j..i].to_vec();
                return Ok(Some((pre, per)));
            }
            seen.insert(st, i);
        }
        Ok(None)
    }
}

fn surd_engine(x: &Quad) -> Engine {
    let d = x.b() * x.b() * x.d();
    let (mut p, mut q) = if x.b().is_positive() {
        (x.a().clone(), x.c().clone())
    } else {
        (-x.a().clone(), -x.c().clone())
    };
    let mut d = d;
    if !(&d - &p * &p).is_multiple_of(&q) {
        let qa = q.abs();
        p *= &qa;
        d = d * &q * &q;
        q *= &qa;
    }
    Engine::Surd { p, q, d }
}

/// Partial quotients of a rational, up to `limit` terms.
fn rational_quotients(r: &BigRational, limit: usize) -> Vec<BigInt> {
    let mut num = r.numer().clone();
    let mut den = r.denom().clone();
    let mut out = Vec::new();
    while !den.is_zero() && out.len() < limit {
        let (a, rem) = num.div_mod_floor(&den);
        out.push(a);
        num = std::mem::replace(&mut den, rem);
    }
    out
}

/// Partial quotients shared by every real in the interval `x`.
pub fn certified_prefix(x: &ApproxReal, limit: usize) -> Vec<BigInt> {
    let lo = rational_quotients(&x.lower().to_rational(), limit + 1);
    let hi = rational_quotients(&x.upper().to_rational(), limit + 1);
    lo.into_iter()
        .zip(hi)
        .take_while(|(a, b)| a == b)
        .map(|(a, _)| a)
        .take(limit)
        .collect()
}

/// First `count` convergents of `beta / delta`.
pub fn expand(beta: &RealSpec, delta: &RealSpec, count: usize, mode: ExpandMode) -> Result<Vec<Convergent>> {
    let mut s = CfStream::new(beta, delta, mode)?;
    s.ensure(count)?;
    Ok(s.convergents.iter().take(count).cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi() -> RealSpec {
        "surd:(1+1*sqrt(5))/2".parse().unwrap()
    }

    /// Direct Fibonacci recurrence, independent of the stream.
    fn fib_convergents(n: usize) -> Vec<(i64, i64)> {
        let mut f = vec![1i64, 1];
        while f.len() < n + 2 {
            let k = f.len();
            f.push(f[k - 1] + f[k - 2]);
        }
        (0..n).map(|k| (f[k + 1], f[k])).collect()
    }

    #[test]
    fn golden_ratio_convergents_are_fibonacci_ratios() {
        let cs = expand(&phi(), &RealSpec::int(1), 6, ExpandMode::Irrational).unwrap();
        let got: Vec<(i64, i64)> = cs
            .iter()
            .map(|c| (c.p.clone().try_into().unwrap(), c.q.clone().try_into().unwrap()))
            .collect();
        assert_eq!(got, fib_convergents(6));
        assert_eq!(got, vec![(1, 1), (2, 1), (3, 2), (5, 3), (8, 5), (13, 8)]);
    }

    #[test]
    fn rational_ratio_is_rejected() {
        let r = expand(&RealSpec::int(1), &RealSpec::int(3), 4, ExpandMode::Irrational);
        assert_eq!(r, Err(Error::RationalRatio));
        let ok = expand(&RealSpec::int(1), &RealSpec::int(3), 4, ExpandMode::AllowRational).unwrap();
        assert_eq!(ok.len(), 2); // 1/3 = [0; 3]
        assert_eq!((ok[1].p.clone(), ok[1].q.clone()), (1.into(), 3.into()));
    }

    #[test]
    fn zero_delta_is_rejected() {
        assert_eq!(
            CfStream::new(&phi(), &RealSpec::int(0), ExpandMode::Irrational).err(),
            Some(Error::DeltaZero)
        );
    }

    #[test]
    fn neighbor_determinant_alternates() {
        let cs = expand(&phi(), &RealSpec::int(1), 30, ExpandMode::Irrational).unwrap();
        for w in cs.windows(2) {
            assert_eq!(neighbor_determinant(&w[0], &w[1]), BigInt::from(w[0].parity_sign()));
        }
    }

    #[test]
    fn convergent_pair_and_range() {
        let mut s = CfStream::new(&phi(), &RealSpec::int(1), ExpandMode::Irrational).unwrap();
        s.ensure(6).unwrap();
        let (a, b) = s.convergent_pair(2).unwrap();
        assert_eq!((a.p, a.q, b.p, b.q), (3.into(), 2.into(), 5.into(), 3.into()));
        let (a, b) = s.convergent_pair(0).unwrap();
        assert_eq!((a.p, a.q, b.p, b.q), (1.into(), 1.into(), 2.into(), 1.into()));
        assert!(matches!(s.convergent_pair(5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn sqrt2_period() {
        let r2: RealSpec = "surd:(0+1*sqrt(2))/1".parse().unwrap();
        let mut s = CfStream::new(&r2, &RealSpec::int(1), ExpandMode::Irrational).unwrap();
        let (pre, per) = s.detect_period(20).unwrap().unwrap();
        assert_eq!(pre, vec![BigInt::from(1)]);
        assert_eq!(per, vec![BigInt::from(2)]);
    }

    #[test]
    fn negative_surd_ratio() {
        // -sqrt(3) = [-2; 3, 1, 2, 1, 2, ...]
        let x: RealSpec = "surd:(0-1*sqrt(3))/1".parse().unwrap();
        let mut s = CfStream::new(&x, &RealSpec::int(1), ExpandMode::Irrational).unwrap();
        s.ensure(6).unwrap();
        let q: Vec<i64> = s.quotients().iter().map(|a| a.try_into().unwrap()).collect();
        assert_eq!(q, vec![-2, 3, 1, 2, 1, 2]);
    }

    #[test]
    fn decimal_expansion_is_certified_or_exhausted() {
        let x: RealSpec = "dec:1.4142135623730950488@60".parse().unwrap();
        let cs = expand(&x, &RealSpec::int(1), 8, ExpandMode::Irrational).unwrap();
        // 1, 3/2, 7/5, 17/12, 41/29, 99/70, 239/169, 577/408
        assert_eq!(cs[7].p, BigInt::from(577));
        assert_eq!(cs[7].q, BigInt::from(408));
        let short: RealSpec = "dec:1.4142135623@30".parse().unwrap();
        assert!(matches!(
            expand(&short, &RealSpec::int(1), 40, ExpandMode::Irrational),
            Err(Error::PrecisionExhausted { .. })
        ));
    }

    #[test]
    fn mixed_fields_use_interval_engine() {
        // sqrt2 / sqrt3 = sqrt(6)/3 = [0; 1, 4, 2, 4, 2, ...]
        let b: RealSpec = "surd:(0+1*sqrt(2))/1".parse().unwrap();
        let d: RealSpec = "surd:(0+1*sqrt(3))/1".parse().unwrap();
        let mut s = CfStream::new(&b, &d, ExpandMode::Irrational).unwrap();
        // sqrt2 and sqrt3 share no field, so this runs the interval engine.
        s.ensure(60).unwrap();
        let q: Vec<i64> = s.quotients()[..6].iter().map(|a| a.try_into().unwrap()).collect();
        assert_eq!(q, vec![0, 1, 4, 2, 4, 2]);
    }
}
