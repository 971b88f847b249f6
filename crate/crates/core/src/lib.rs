//! Dyadic bi-parameter harmonic analysis on a finite `2^N × 2^N` grid.

pub mod bmo;
pub mod dyadic;
pub mod error;
pub mod haar;
pub mod linalg;
pub mod norms;
pub mod open_set;
pub mod operators;
pub mod scalar;

pub use dyadic::{DyadicInterval, DyadicRectangle, Parity, ParityClass};
pub use error::{Error, Result};
pub use haar::{GridFunction1D, GridFunction2D, HaarSymbol};
pub use open_set::DyadicOpenSet;
pub use scalar::{QSqrt2, Scalar};
pub use linalg::{LinearMap, SparseMatrix};
