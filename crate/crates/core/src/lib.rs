//! Polar-decomposition based block orthogonal iteration on products of complex
//! Stiefel manifolds, for low-rank orthogonal and low multilinear rank tensor
//! approximation.

// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod diagnostics;
pub mod error;
pub mod instances;
pub mod objective;
pub mod solver;
pub mod stiefel;
pub mod tensor;
pub mod trace;

pub use error::{Error, Result};
pub use objective::{DaggerMode, Family, ObjectiveSpec};
pub use stiefel::{polar_decompose, PolarFactors, StiefelPoint, StiefelTuple, TangentVector};
pub use tensor::{ComplexDenseTensor, ComplexMatrix, C64};
