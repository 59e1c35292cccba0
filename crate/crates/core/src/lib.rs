//! Multisegment combinatorics: Zelevinsky posets, Kazhdan–Lusztig
//! polynomials, truncation and symmetrization reductions, partial derivatives
//! and induced products of irreducible representations, each with an
//! independent brute-force route for cross-checking.

pub mod cli;
pub mod coxeter;
pub mod error;
pub mod formulas;
pub mod kl;
pub mod multiseg;
pub mod poset;
pub mod qpoly;
pub mod reduce;
pub mod ring;
pub mod sample;

pub use error::{Error, Result};
pub use multiseg::{Multisegment, Segment};
