//! Loop measures, Poisson loop soups and the homotopy and homology of loops
//! on finite weighted graphs.

// `!(x >= 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod fourier;
pub mod freegroup;
pub mod graph;
pub mod linalg;
pub mod measure;
pub mod signature;
pub mod spectra;
pub mod soup;

pub use error::{Error, ErrorKind, Result};
