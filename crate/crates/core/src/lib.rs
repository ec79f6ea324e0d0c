//! Computational companion for Rademacher-Gaussian tail comparison.
//!
//! The crate bundles
//!
//! * scalar special functions with certified error bounds ([`specfun`]),
//! * adaptive Gauss-Kronrod quadrature ([`quad`]),
//! * exact rational polynomials, Sturm sequences and the positivity
//!   certificate behind log-concavity of the rank-two comparator density
//!   ([`poly`], [`polycert`]),
//! * the rank-two comparator density, its tail, hazard and the truncated
//!   cube-moment bound ([`density`]),
//! * exact enumeration of weighted Rademacher sums ([`rademacher`]),
//! * Paley-Zygmund type moment bounds ([`moments`]),
//! * a reproducible Monte Carlo engine for matrix-weighted sums of
//!   sphere-uniform vectors ([`spheresim`], [`rng`]).
//!
//! Numeric code is generic over [`Real`] (and [`Field`] where exact
//! rationals make sense); the aliases below fix the common choices.

// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod error;
pub mod moments;
pub mod poly;
pub mod polycert;
pub mod quad;
pub mod rademacher;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod specfun;
pub mod spheresim;

pub use error::{Error, Result};
pub use report::{CertificateReport, SubCheck};
pub use scalar::{Field, Real};

pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;

/// Exact rational scalar.
pub type Rational = BigRational;
/// Double precision value with a certified enclosure half-width.
pub type Eval = specfun::EvalReal<f64>;
/// Rank-two comparator model in double precision.
pub type Density = density::DensityModel<f64>;
/// Moment summary over doubles.
pub type Moments = moments::MomentSummary<f64>;
/// Moment summary over exact rationals.
pub type ExactMoments = moments::MomentSummary<BigRational>;
/// Polynomial with exact rational coefficients.
pub type RationalPoly = poly::Poly<BigRational>;
