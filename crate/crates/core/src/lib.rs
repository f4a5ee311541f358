//! Exact combinatorics and numerics for block-spin renormalization of a
//! nearest-neighbour ±1 spin system on ℤ^ν.
//!
//! The crate is `no_std` (with `alloc`); everything that needs an operating
//! system — file formats, CLI plumbing, progress output — lives in the
//! companion `blockspin-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cumulant;
pub mod estimation;
pub mod family;
pub mod free_field;
pub mod gibbs;
pub mod lattice;
pub mod series;

/// Exact rational scalar used wherever a result is an exact count or an exact
/// alternating sum (free-measure moments, series coefficients).
pub type Rational = num_rational::BigRational;

pub use num_bigint::BigInt;
