//! Exact and certified arithmetic substrate.

pub mod approx;
pub mod dyadic;
pub mod quad;
pub mod spec;

pub use approx::{compare, pow_rational, ApproxReal, Comparison};
pub use dyadic::{Dyadic, Round};
pub use quad::Quad;
pub use spec::{DecimalLiteral, RealSpec};

/// Certified enclosure of a spec at `requested_bits`; see [`RealSpec::eval`].
pub fn eval(spec: &RealSpec, requested_bits: u32) -> crate::Result<ApproxReal> {
    spec.eval(requested_bits)
}
