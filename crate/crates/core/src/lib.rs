//! Partition-function machinery for normal factor graphs.
//!
//! Two graph kinds are supported: standard graphs with nonnegative real local
//! functions, and double-edge graphs whose edges carry a pair `(x, x')` and
//! whose local functions have Hermitian Choi matrices. On top of the data
//! model the crate provides the sum-product algorithm, the Bethe partition
//! function at its fixed points, the loop-calculus transform, finite graph
//! covers and three ways of computing the degree-M Bethe partition function.

pub mod cover;
pub mod error;
pub mod experiment;
pub mod gen;
pub mod lct;
pub mod limits;
pub mod nfg;
pub mod spa;
pub mod tensor;

pub use error::{NfgError, Result};
pub use nfg::{FactorGraph, GraphKind};
pub use tensor::{ComplexTensor, C64};
