//! Run configuration files and the string forms of numeric parameters.
//!
//! Numbers cross the boundary as strings so they stay exact: `0.8`, `4/5`
//! and `rat:4/5` all give the rational 4/5; horizons also accept `1e6`.

use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Deserialize;

use crate::arith::spec::parse_decimal_exact;
use crate::boxdet::Backend;
use crate::error::{Error, Result};
use crate::lattice::Mat2R;

/// JSON run configuration. Every field is optional; command-line flags
/// take precedence.
#[derive(Clone, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub source: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub r: Option<String>,
    pub nu_from: Option<usize>,
    pub nu_to: Option<usize>,
    #[serde(rename = "T")]
    pub horizon: Option<String>,
    pub psi: Option<String>,
    pub backend: Option<String>,
    pub output: Option<PathBuf>,
    pub precision_bits: Option<u32>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<RunConfig> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParameter(format!("config JSON: {e}")))
    }

    /// Load a config; relative matrix and output paths resolve against the
    /// config file's directory.
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let mut cfg = RunConfig::from_json_str(&read(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.source, &mut cfg.target, &mut cfg.output].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn backend(&self) -> Result<Backend> {
        self.backend.as_deref().map_or(Ok(Backend::Auto), str::parse)
    }
}

/// A matrix file: JSON object with `a11 .. a22` as real-number strings.
pub fn load_matrix(path: &Path) -> Result<Mat2R> {
    Mat2R::from_json_str(&read(path)?)
}

/// Exact rational from `n/d`, a decimal, `rat:n/d`, or `<decimal>e<int>`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let t = t.strip_prefix("rat:").unwrap_or(t);
    let bad = || Error::InvalidParameter(format!("`{s}` is not an exact number"));
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_decimal_exact(n).ok_or_else(bad)?;
        let d = parse_decimal_exact(d).ok_or_else(bad)?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(n / d);
    }
    if let Some((m, e)) = t.split_once(['e', 'E']) {
        let m = parse_decimal_exact(m).ok_or_else(bad)?;
        let e: i32 = e.parse().map_err(|_| bad())?;
        if e.unsigned_abs() > 10_000 {
            return Err(bad());
        }
        let p = BigRational::from_integer(num_traits::pow(BigInt::from(10), e.unsigned_abs() as usize));
        return Ok(if e >= 0 { m * p } else { m / p });
    }
    parse_decimal_exact(t).ok_or_else(bad)
}

/// The exponent `r`: must lie in `(0, 1)`. Values `r <= 3/4` are accepted
/// with a warning, since the box lemma is only established above 3/4.
pub fn parse_exponent(s: &str) -> Result<(BigRational, Option<String>)> {
    let r = parse_rational(s)?;
    if !r.is_positive() || r >= BigRational::one() {
        return Err(Error::InvalidParameter(format!("r = {s} must lie in (0, 1)")));
    }
    let warn = (r <= BigRational::new(3.into(), 4.into()))
        .then(|| format!("warning: r = {s} <= 3/4; solutions are not guaranteed to exist"));
    Ok((r, warn))
}

/// A horizon `T >= 1`.
pub fn parse_horizon(s: &str) -> Result<BigRational> {
    let t = parse_rational(s)?;
    if t < BigRational::one() {
        return Err(Error::InvalidParameter(format!("T = {s} must be at least 1")));
    }
    Ok(t)
}
