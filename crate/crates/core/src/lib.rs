//! Constructive inhomogeneous Diophantine approximation in SL2(R).
//!
//! Given a source matrix `A` with determinant 1 and a target `Xi`, the
//! pipelines here produce times `t` and integer matrices `gamma` in SL2(Z)
//! such that `u(t) * A * gamma - Xi` is small, where `u(t)` is the upper
//! unipotent matrix `[[1, t], [0, 1]]`.
//!
//! The construction runs through continued-fraction convergents of
//! `beta / delta` ([`cf`]), the lattice basis they induce ([`lattice`]), a
//! box-constrained determinant equation `xy - zw = 1` ([`boxdet`]) and a
//! time alignment step ([`theorem1`]). [`theorem2`] gives the variant that
//! is uniform in a horizon `T`, and [`rate`] fits the convergence exponents.

pub mod arith;
pub mod boxdet;
pub mod cf;
pub mod config;
pub mod error;
pub mod lattice;
pub mod primes;
pub mod rate;
pub mod theorem1;
pub mod theorem2;

pub use arith::{ApproxReal, RealSpec};
pub use error::{Error, Result};
