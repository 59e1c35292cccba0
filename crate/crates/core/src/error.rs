use thiserror::Error;

use crate::multiseg::{Multisegment, Segment};

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("segments {0} and {1} are not linked")]
    NotLinked(Segment, Segment),
    #[error("segment {0} is not a member of {1}")]
    NotMember(Segment, Multisegment),
    #[error("rank invariant needs i <= j, got i={0}, j={1}")]
    BadRange(i64, i64),
    #[error("poset has more than {0} elements")]
    SizeLimit(usize),
    #[error("permutation size {0} exceeds the supported maximum of 16")]
    TooLarge(usize),
    #[error("permutations of different sizes ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("{0} is not symmetric")]
    NotSymmetric(Multisegment),
    #[error("{0} is not of parabolic identity shape")]
    NotParabolic(Multisegment),
    #[error("invalid permutation: {0}")]
    BadPermutation(String),
    #[error("quotient mismatch: {0}")]
    NotInQuotient(String),
    #[error("{0} is not in the image of the parametrisation")]
    NotInImage(Multisegment),
    #[error("{b} is not below {a}")]
    NotComparable { b: Multisegment, a: Multisegment },
    #[error("{0} lies outside the domain of the truncation map")]
    NotInDomain(Multisegment),
    #[error("no relation-type preserving bijection between {0} and {1}")]
    NoBijection(Multisegment, Multisegment),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("triangular system is singular at {0}")]
    SingularSystem(String),
    #[error("reduction could not reach a covered case: {0}")]
    UnreducedCase(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
