//! Uniform-in-horizon approximation under a lower bound
//! `||q beta/delta|| >= psi(q)`.
//!
//! For a horizon `T` put `U = T^(1/(1+r))` and `U* = rho(U)`. A convergent
//! `(q, p)` with `U* <= q <= U` and a companion `(q', p')` with
//! `U* <= q' <= 2U` frame the lattice; the box construction then yields
//! `1 <= |t| <= T` with error of order `U^r / U*`.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::spec::parse_decimal_exact;
use crate::arith::{pow_rational, ApproxReal, Dyadic, Quad};
use crate::cf::{CfStream, ExpandMode};
use crate::error::{Error, Result};
use crate::lattice::Mat2R;
use crate::theorem1::{check_hypotheses, construct, ApproxResult, Frame, PipelineOptions, TargetSpec};
use crate::RealSpec;

const CHECK_BITS: [u32; 3] = [128, 512, 2048];
const MAX_ATTEMPTS: u32 = 12;

/// `psi(t) = kappa t^-omega` with `kappa > 0`, `omega >= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsiFunction {
    PowerLaw { kappa: BigRational, omega: BigRational },
}

impl PsiFunction {
    pub fn power_law(kappa: BigRational, omega: BigRational) -> Result<PsiFunction> {
        if !kappa.is_positive() {
            return Err(Error::InvalidParameter("kappa must be positive".into()));
        }
        if omega < BigRational::one() {
            return Err(Error::InvalidParameter("omega must be at least 1".into()));
        }
        Ok(PsiFunction::PowerLaw { kappa, omega })
    }

    pub fn kappa(&self) -> &BigRational {
        match self {
            PsiFunction::PowerLaw { kappa, .. } => kappa,
        }
    }

    pub fn omega(&self) -> &BigRational {
        match self {
            PsiFunction::PowerLaw { omega, .. } => omega,
        }
    }

    /// `psi(t)` for rational `t > 0`.
    pub fn psi(&self, t: &BigRational, bits: u32) -> Result<ApproxReal> {
        let p = pow_rational(t, &-self.omega(), bits)?;
        Ok(&ApproxReal::from_rational(self.kappa(), bits) * &p)
    }

    /// `rho(s) = (kappa s)^(1/omega)`, the inverse of `t -> 1/psi(t)`.
    pub fn rho(&self, s: &BigRational, bits: u32) -> Result<ApproxReal> {
        pow_rational(&(self.kappa() * s), &self.omega().recip(), bits)
    }

    /// `rho` on an enclosure; `rho` is increasing, so the endpoints map to
    /// the endpoints.
    pub fn rho_approx(&self, s: &ApproxReal) -> Result<ApproxReal> {
        let bits = s.prec();
        let lo = self.rho(&positive(s.lower())?, bits)?;
        let hi = self.rho(&positive(s.upper())?, bits)?;
        Ok(ApproxReal::from_bounds(lo.lower().clone(), hi.upper().clone(), bits))
    }

    /// `1/psi` on an enclosure; increasing as well.
    pub fn inv_psi_approx(&self, t: &ApproxReal) -> Result<ApproxReal> {
        let bits = t.prec();
        let one = |x: &Dyadic| -> Result<ApproxReal> { self.psi(&positive(x)?, bits)?.recip() };
        let lo = one(t.lower())?;
        let hi = one(t.upper())?;
        Ok(ApproxReal::from_bounds(lo.lower().clone(), hi.upper().clone(), bits))
    }
}

fn positive(x: &Dyadic) -> Result<BigRational> {
    let r = x.to_rational();
    if r.is_positive() {
        Ok(r)
    } else {
        Err(Error::InvalidParameter("argument must be positive".into()))
    }
}

fn parse_number(s: &str, whole: &str) -> Result<BigRational> {
    let bad = || Error::InvalidParameter(format!("cannot parse psi `{whole}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = parse_decimal_exact(n).ok_or_else(bad)?;
            let d = parse_decimal_exact(d).ok_or_else(bad)?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(n / d)
        }
        None => parse_decimal_exact(s).ok_or_else(bad),
    }
}

/// Accepts `kappa*t^-omega`, `t^-omega` and `kappa*t^(-omega)`; numbers are
/// decimals or fractions.
impl FromStr for PsiFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<PsiFunction> {
        let body: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::InvalidParameter(format!("psi must look like kappa*t^-omega, got `{s}`"));
        let (head, exp) = body.split_once("t^").ok_or_else(bad)?;
        let kappa = match head.strip_suffix('*') {
            Some(k) => parse_number(k, s)?,
            None if head.is_empty() => BigRational::one(),
            None => return Err(bad()),
        };
        let exp = exp
            .strip_prefix('(')
            .and_then(|e| e.strip_suffix(')'))
            .unwrap_or(exp);
        let omega = exp.strip_prefix('-').ok_or_else(bad)?;
        PsiFunction::power_law(kappa, parse_number(omega, s)?)
    }
}

/// Outcome of an exact sweep of `||q x|| >= psi(q)` for `1 <= q <= q_max`.
#[derive(Clone, Debug)]
pub struct PsiReport {
    pub q_max: u64,
    /// Number of `q` checked (stops at the first violation).
    pub checked: u64,
    pub first_violation: Option<u64>,
    /// Smallest `||q x|| / psi(q)` seen, with its `q`.
    pub min_ratio: f64,
    pub argmin: u64,
}

impl PsiReport {
    pub fn holds(&self) -> bool {
        self.first_violation.is_none()
    }
}

fn quad_pow(x: &Quad, n: u32) -> Quad {
    let mut acc = Quad::from_int(BigInt::one());
    for _ in 0..n {
        acc = acc.mul(x).expect("powers stay in one field");
    }
    acc
}

/// Check `min_p |q beta/delta - p| >= psi(q)` for every `q <= q_max` in
/// exact quadratic arithmetic. With `omega = n/m` the test is
/// `||q x||^m q^n >= kappa^m`.
pub fn verify_psi(beta: &RealSpec, delta: &RealSpec, psi: &PsiFunction, q_max: u64) -> Result<PsiReport> {
    let (b, d) = match (beta.as_quad(), delta.as_quad()) {
        (Some(b), Some(d)) => (b, d),
        _ => {
            return Err(Error::InvalidParameter(
                "verify_psi needs exact (rational or surd) inputs".into(),
            ))
        }
    };
    if d.is_zero() {
        return Err(Error::DeltaZero);
    }
    let x = b.div(&d).ok_or_else(|| {
        Error::InvalidParameter("beta and delta lie in different quadratic fields".into())
    })?;
    let omega = psi.omega();
    let n = omega.numer().to_u32().ok_or_else(|| Error::InvalidParameter("omega too large".into()))?;
    let m = omega.denom().to_u32().ok_or_else(|| Error::InvalidParameter("omega too large".into()))?;
    let kappa_m = Quad::from_rational(&num_traits::pow(psi.kappa().clone(), m as usize));
    let kappa = psi.kappa().to_f64().unwrap_or(f64::NAN);
    let omega_f = omega.to_f64().unwrap_or(f64::NAN);
    let one = Quad::from_int(BigInt::one());

    let mut report = PsiReport {
        q_max,
        checked: 0,
        first_violation: None,
        min_ratio: f64::INFINITY,
        argmin: 0,
    };
    for q in 1..=q_max {
        let qb = BigInt::from(q);
        let qx = x.mul_int(&qb);
        let frac = qx.sub(&Quad::from_int(qx.floor())).expect("rational shift");
        let other = one.sub(&frac).expect("rational shift");
        let dist = if frac.cmp_exact(&other) == Some(std::cmp::Ordering::Greater) {
            other
        } else {
            frac
        };
        let lhs = quad_pow(&dist, m).mul_int(&num_traits::pow(qb, n as usize));
        report.checked = q;
        let ratio = dist.eval(64).to_f64() * (q as f64).powf(omega_f) / kappa;
        if ratio < report.min_ratio {
            report.min_ratio = ratio;
            report.argmin = q;
        }
        if lhs.cmp_exact(&kappa_m) == Some(std::cmp::Ordering::Less) {
            report.first_violation = Some(q);
            break;
        }
    }
    Ok(report)
}

/// A primitive point `(q, p)` and a companion `(q', p')` with
/// `q p' - q' p = +-1`.
#[derive(Clone, Debug)]
pub struct PrimitivePair {
    /// Convergent index of `(q, p)`.
    pub nu: usize,
    pub q: BigInt,
    pub p: BigInt,
    pub q1: BigInt,
    pub p1: BigInt,
    pub u: BigRational,
    /// `rho(U)`, or 1 when clamped.
    pub u_star: ApproxReal,
    pub clamped: bool,
}

impl PrimitivePair {
    pub fn det(&self) -> BigInt {
        &self.q * &self.p1 - &self.q1 * &self.p
    }
}

fn decide(mut check: impl FnMut(u32) -> Result<Option<bool>>) -> Result<bool> {
    for bits in CHECK_BITS {
        if let Some(v) = check(bits)? {
            return Ok(v);
        }
    }
    Err(Error::Indistinguishable {
        bits: CHECK_BITS[CHECK_BITS.len() - 1],
    })
}

/// `Some(a <= b)` once the enclosures decide it.
fn le(a: &ApproxReal, b: &ApproxReal) -> Option<bool> {
    if a.certainly_le(b) {
        Some(true)
    } else if b.certainly_le(a) && !a.possibly_le(b) {
        Some(false)
    } else if a.is_exact() && b.is_exact() {
        Some(a.lower() <= b.lower())
    } else {
        None
    }
}

/// `(q, p)`: the convergent with the largest `q <= U`. Companion: the
/// previous convergent plus the largest multiple `k <= a_{nu+1}` of
/// `(q, p)` keeping `q' <= 2U`.
pub fn find_primitive_pair(beta: &RealSpec, delta: &RealSpec, psi: &PsiFunction, u: &BigRational) -> Result<PrimitivePair> {
    if u < &BigRational::one() {
        return Err(Error::InvalidParameter("U must be at least 1".into()));
    }
    let mut stream = CfStream::new(beta, delta, ExpandMode::Irrational)?;
    let u_floor = u.floor().to_integer();
    loop {
        let len = stream.len();
        if len > 0 && stream.convergents()[len - 1].q > u_floor {
            break;
        }
        stream.ensure(len + 8)?;
        if stream.len() == len {
            return Err(Error::PrecisionExhausted {
                requested: 0,
                available: beta.available_bits().min(delta.available_bits()),
            });
        }
    }
    let cs = stream.convergents();
    let nu = cs.iter().rposition(|c| c.q <= u_floor).ok_or_else(|| {
        Error::NoPairInWindow("no convergent denominator is at most U".into())
    })?;
    let (q, p) = (cs[nu].q.clone(), cs[nu].p.clone());
    let (qm, pm) = if nu == 0 {
        (BigInt::zero(), BigInt::one())
    } else {
        (cs[nu - 1].q.clone(), cs[nu - 1].p.clone())
    };
    let a_next = &stream.quotients()[nu + 1];
    let two_u = (u * BigInt::from(2)).floor().to_integer();
    let k_room = (&two_u - &qm) / &q;
    let k = k_room.min(a_next.clone());
    if k < BigInt::one() {
        return Err(Error::NoPairInWindow(format!("no companion multiple fits q' <= 2U (k = {k})")));
    }
    let q1 = &qm + &k * &q;
    let p1 = &pm + &k * &p;

    let raw = psi.rho(u, CHECK_BITS[0])?;
    let clamped = raw.upper() < &Dyadic::from_int(BigInt::one());
    let u_star_at = |bits: u32| -> Result<ApproxReal> {
        if clamped {
            Ok(ApproxReal::one(bits))
        } else {
            psi.rho(u, bits)
        }
    };
    let u_star = u_star_at(CHECK_BITS[0])?;

    let int = |n: &BigInt, bits: u32| ApproxReal::from_int(n.clone(), bits);
    let dev = |qq: &BigInt, pp: &BigInt, bits: u32| -> Result<ApproxReal> {
        let x = stream.ratio(bits)?;
        Ok((&x.mul_int(qq) - &int(pp, bits)).abs())
    };
    let fail = |what: &str| Err(Error::NoPairInWindow(what.to_string()));

    if !decide(|b| Ok(le(&u_star_at(b)?, &int(&q, b))))? {
        return fail(&format!("U* <= q fails for q = {q}"));
    }
    if !decide(|b| {
        let lhs = dev(&q, &p, b)?.mul_int(&u.numer().clone());
        Ok(le(&lhs, &int(u.denom(), b)))
    })? {
        return fail(&format!("|x q - p| <= 1/U fails for q = {q}"));
    }
    if !decide(|b| Ok(le(&u_star_at(b)?, &int(&q1, b))))? {
        return fail(&format!("U* <= q' fails for q' = {q1}"));
    }
    if !decide(|b| Ok(le(&(&dev(&q1, &p1, b)? * &u_star_at(b)?), &ApproxReal::one(b))))? {
        return fail(&format!("|x q' - p'| <= 1/U* fails for q' = {q1}"));
    }
    Ok(PrimitivePair {
        nu,
        q,
        p,
        q1,
        p1,
        u: u.clone(),
        u_star,
        clamped,
    })
}

/// `T^(r/(1+r)) / rho(T^(1/(1+r)))`.
pub fn uniform_bound(psi: &PsiFunction, t: &BigRational, r: &BigRational, bits: u32) -> Result<ApproxReal> {
    let one = BigRational::one();
    let s = &one + r;
    let num = pow_rational(t, &(r / &s), bits)?;
    let u = pow_rational(t, &(&one / &s), bits)?;
    num.div(&psi.rho_approx(&u)?)
}

/// Result of one horizon.
#[derive(Clone, Debug)]
pub struct UniformResult {
    pub horizon: BigRational,
    pub result: ApproxResult,
    pub pair: PrimitivePair,
    /// `U` of the successful attempt.
    pub u: BigRational,
    pub bound: ApproxReal,
    /// `error / bound`.
    pub constant_c: ApproxReal,
    pub attempts: u32,
    pub warnings: Vec<String>,
}

fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_f64(x).ok_or_else(|| Error::InvalidParameter(format!("non-finite scale {x}")))
}

/// `U = T^(1/(1+r))`, taken as the lower end of a 64-bit enclosure.
fn initial_u(t: &BigRational, r: &BigRational) -> Result<BigRational> {
    let e = BigRational::one() / (BigRational::one() + r);
    let u = pow_rational(t, &e, 64)?;
    Ok(u.lower().to_rational().max(BigRational::one()))
}

/// Solve for one horizon `T >= 1`: returns `t` with `1 <= |t| <= T`.
///
/// The construction gives `|t| << U^(1+r)`; when the achieved `|t|` leaves
/// `[1, T]` the scale `U` is adjusted and the run repeated, up to a fixed
/// number of attempts.
pub fn approximate_uniform(
    a: &Mat2R,
    xi: &TargetSpec,
    psi: &PsiFunction,
    horizon: &BigRational,
    opts: &PipelineOptions,
) -> Result<UniformResult> {
    check_hypotheses(a)?;
    if horizon < &BigRational::one() {
        return Err(Error::InvalidParameter("T must be at least 1".into()));
    }
    let r = &opts.r;
    let exp = (BigRational::one() + r).recip().to_f64().unwrap_or(0.5);
    let t_f = horizon.to_f64().unwrap_or(f64::INFINITY);
    let mut u = initial_u(horizon, r)?;
    let mut warnings = Vec::new();
    let mut last_t = None;
    for attempt in 1..=MAX_ATTEMPTS {
        let pair = find_primitive_pair(a.beta(), a.delta(), psi, &u)?;
        if pair.clamped && !warnings.iter().any(|w: &String| w.contains("clamped")) {
            warnings.push(format!("U* = rho(U) < 1 at U = {}; clamped to 1", u.to_f64().unwrap_or(0.0)));
        }
        let frame = Frame {
            nu: pair.nu,
            q: pair.q.clone(),
            p: pair.p.clone(),
            q1: pair.q1.clone(),
            p1: pair.p1.clone(),
            scale: u.clone(),
        };
        let result = construct(a, xi, &frame, opts)?;
        let t_abs = result.t.abs().to_rational();
        if &t_abs <= horizon && t_abs >= BigRational::one() {
            let bits = result.precision_bits.max(128);
            let bound = uniform_bound(psi, horizon, r, bits)?;
            let constant_c = result.error.div(&bound)?;
            return Ok(UniformResult {
                horizon: horizon.clone(),
                result,
                pair,
                u,
                bound,
                constant_c,
                attempts: attempt,
                warnings,
            });
        }
        let achieved = t_abs.to_f64().unwrap_or(f64::INFINITY);
        last_t = Some(result.t.clone());
        let factor = if t_abs < BigRational::one() {
            2.0
        } else {
            // Aim a little inside the horizon.
            (0.9 * t_f / achieved).powf(exp).min(0.95)
        };
        let next = rational_from_f64(u.to_f64().unwrap_or(1.0) * factor)?;
        if next < BigRational::one() {
            break;
        }
        u = next;
    }
    Err(Error::HorizonTooSmall {
        achieved_t: last_t.map(|t| t.to_string()).unwrap_or_default(),
        horizon: horizon.to_string(),
    })
}

/// Independent runs for several horizons, in parallel, in input order.
pub fn approximate_uniform_many(
    a: &Mat2R,
    xi: &TargetSpec,
    psi: &PsiFunction,
    horizons: &[BigRational],
    opts: &PipelineOptions,
) -> Vec<Result<UniformResult>> {
    horizons
        .par_iter()
        .map(|t| approximate_uniform(a, xi, psi, t, opts))
        .collect()
}
