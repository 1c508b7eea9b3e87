//! Signatures of free-group words in exact rational arithmetic, log-signatures
//! in the Lyndon basis, and loop currents.

pub mod currents;
pub mod lyndon;
pub mod tensor;

pub use currents::{
    current, homology1, homology2, homology3, lie_polynomial_via_currents, signature_current,
    H3Basis,
};
pub use lyndon::{witt_dimension, LiePoly, LyndonBasis};
pub use tensor::{shuffle_check, signature, Homogeneous, Rational, TensorSeries};

use crate::error::{Error, Result};
use crate::freegroup::Word;

pub const DEFAULT_DEPTH: usize = 5;
pub const DEFAULT_MAX_DEGREE: usize = 8;

/// Degree `d(g)` and leading Lie polynomial `P_g` of a nontrivial element.
///
/// `P_g` is the first nonzero homogeneous part of `S(g) - 1`.
pub fn degree_and_lead(word: &Word, rank: usize, max_degree: usize) -> Result<(usize, LiePoly)> {
    let w = word.reduce();
    if w.is_empty() {
        return Err(Error::Precondition("trivial element has no degree".into()));
    }
    let s = signature(&w, rank, max_degree)?;
    let d = s
        .lowest_degree()
        .ok_or(Error::DegreeExceeds(max_degree))?;
    let p = LyndonBasis::new(rank, d).project(s.component(d))?;
    Ok((d, p))
}
