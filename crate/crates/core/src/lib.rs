//! Discrete spectral ("Navier") and restricted ("Dirichlet") fractional
//! Laplacians on bounded domains.
//!
//! The crate builds both operators on uniform grids in one and two
//! dimensions, compares them at matrix level, solves the weighted
//! `y^{1−2s}` extension problem whose energy reproduces both quadratic
//! forms, and evaluates fractional Sobolev quotients against the closed-form
//! best constant on the whole space.
//!
//! Every numerical type is generic over the scalar ([`Real`], implemented for
//! `f32` and `f64`); the `f64` aliases below are what the tooling uses.

// Negated comparisons deliberately reject NaN; the Lanczos coefficients are
// kept at their published precision.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analysis;
pub mod domain;
pub mod error;
pub mod extension;
pub mod linalg;
pub mod operators;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SymMatrix = linalg::SymMatrix<f64>;
pub type EigenDecomposition = linalg::EigenDecomposition<f64>;
pub type BoxGrid = domain::BoxGrid<f64>;
pub type SubDomain = domain::SubDomain<f64>;
pub type GridFunction = domain::GridFunction<f64>;
pub type Shape = domain::Shape<f64>;
pub type SymOperator = operators::SymOperator<f64>;
pub type SpectrumComparison = operators::SpectrumComparison<f64>;
pub type ExtensionMesh = extension::ExtensionMesh<f64>;
pub type ExtensionSolution = extension::ExtensionSolution<f64>;
pub type SobolevSetup = analysis::SobolevSetup<f64>;
pub type QuotientResult = analysis::QuotientResult<f64>;
