//! Doubly sparse compressed sensing over the reals.
//!
//! Builds measurement matrices `H = G^T H_inner` from two real Reed-Solomon
//! codes so that a `t`-sparse signal can be recovered exactly from `r`
//! linear measurements of which up to `l` carry arbitrarily large errors,
//! with `r = 2(t + l)` rows (the fewest possible). Recovery decodes the outer
//! code to clean the measurements, then syndrome-decodes the inner code.
//! The [`oracle`] module re-checks every such claim by exhaustive
//! enumeration on small instances.

pub mod error;
pub mod format;
pub mod numerics;
pub mod oracle;
pub mod recovery;
pub mod rs_code;
pub mod sensing_matrix;
pub mod simulate;
pub mod sparse;

pub use error::{Error, Result};
pub use numerics::Tolerance;
pub use sensing_matrix::{build, CsMatrix, CsMatrixSpec, Measurement, Variant};
pub use sparse::SparseVector;
