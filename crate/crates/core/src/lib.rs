//! Computational workbench for the gl(N+1) Gaudin model.
//!
//! The crate builds exact finite-dimensional gl(N+1)-modules and their tensor
//! products, the universal differential operator of the Bethe algebra, the
//! master function with its critical points, the weight function, and the
//! Wronskian data attached to a critical point. The [`harness`] module ties
//! these together into a verification pipeline that produces a JSON report.
//!
//! Most arithmetic is generic over [`Scalar`]: exact rationals
//! ([`Rational`]) for the algebraic identities and `Complex64` for anything
//! that touches numerically found critical points.

pub mod bethe;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod master;
pub mod pencil;
pub mod poly;
pub mod ratfun;
pub mod repr;
pub mod scalar;
pub mod series;
pub mod weight_fn;
pub mod wronski;

pub use error::{GaudinError, Result};
pub use num_complex::Complex64;
pub use scalar::{Rational, Scalar};
