//! Finite-dimensional laboratory for m-isometries, m-skew-symmetric
//! generators and the shift on harmonically weighted Dirichlet spaces.
//!
//! Everything is dense and desk-sized: operators are [`ComplexMatrix`]
//! values of dimension at most a few dozen, measures on the circle are
//! finitely representable ([`OperatorMeasure`]), and all Gram data is exact.

pub mod dirichlet;
pub mod error;
pub mod exec;
pub mod experiments;

pub mod isometry;
pub mod measures;

pub mod numerics;
pub mod random;
pub mod semigroup;

pub use error::{Error, Result};
pub use exec::Exec;
pub use measures::OperatorMeasure;

pub use numerics::{ComplexMatrix, C64};
