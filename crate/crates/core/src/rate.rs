//! Log-log fits of error against `|t|` or `q_{nu+1}` over pipeline sweeps.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::arith::Dyadic;
use crate::error::{Error, Result};
use crate::theorem1::ApproxResult;

/// One point of a sweep.
#[derive(Clone, Debug)]
pub struct RateSample {
    pub t_abs: Dyadic,
    /// Upper end of the certified error.
    pub error: Dyadic,
    pub nu: usize,
    pub q_next: BigInt,
}

impl RateSample {
    pub fn from_result(r: &ApproxResult) -> RateSample {
        RateSample {
            t_abs: r.t.abs(),
            error: r.error.upper().clone(),
            nu: r.nu,
            q_next: r.q_next.clone(),
        }
    }

    fn x(&self, axis: XAxis) -> Option<f64> {
        match axis {
            XAxis::TAbs => ln_dyadic(&self.t_abs),
            XAxis::QNext => ln_int(&self.q_next),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum XAxis {
    #[default]
    TAbs,
    QNext,
}

impl FromStr for XAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<XAxis> {
        match s {
            "t" | "t_abs" => Ok(XAxis::TAbs),
            "q" | "q_next" => Ok(XAxis::QNext),
            _ => Err(Error::InvalidParameter(format!("unknown x axis `{s}`"))),
        }
    }
}

/// Natural log of a positive integer of any size.
pub fn ln_int(n: &BigInt) -> Option<f64> {
    if !n.is_positive() {
        return None;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return Some(n.to_f64()?.ln());
    }
    let shift = bits - 64;
    Some((n >> shift).to_f64()?.ln() + shift as f64 * std::f64::consts::LN_2)
}

/// Natural log of a positive dyadic of any size.
pub fn ln_dyadic(x: &Dyadic) -> Option<f64> {
    Some(ln_int(x.mantissa())? + x.exponent() as f64 * std::f64::consts::LN_2)
}

/// Least-squares line through `(ln x, ln error)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in the log domain.
    pub rms: f64,
    pub n: usize,
}

/// Points with `x < 1` (log below zero) or nonpositive error are left out.
fn log_points(samples: &[RateSample], axis: XAxis) -> Vec<(f64, f64)> {
    samples
        .iter()
        .filter_map(|s| {
            let x = s.x(axis)?;
            let y = ln_dyadic(&s.error)?;
            (x >= 0.0).then_some((x, y))
        })
        .collect()
}

/// Ordinary least squares on `(ln x, ln error)`, all points weighted equally.
pub fn fit_slope(samples: &[RateSample], axis: XAxis) -> Result<SlopeFit> {
    let pts = log_points(samples, axis);
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(Error::Degenerate(format!(
            "need 3 distinct x values, have {}",
            xs.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        rms,
        n: pts.len(),
    })
}

/// `max error / x^exponent` over the samples, computed in the log domain.
pub fn bound_constant(samples: &[RateSample], exponent: f64, axis: XAxis) -> Result<f64> {
    samples
        .iter()
        .filter_map(|s| Some(ln_dyadic(&s.error)? - exponent * s.x(axis)?))
        .reduce(f64::max)
        .map(f64::exp)
        .ok_or_else(|| Error::Degenerate("no usable samples".into()))
}
