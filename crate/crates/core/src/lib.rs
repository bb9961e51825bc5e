//! Holomorphic functional calculus of one and two matrices.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// `is_multiple_of` is newer than the minimum supported toolchain
#![allow(clippy::manual_is_multiple_of)]

pub mod calculus;
pub mod contour;
pub mod error;
pub mod frechet;
pub mod gauss;
pub mod holofun;
pub mod numcore;
pub mod pencil;
pub mod random;
pub mod sylvester;

pub use calculus::CalculusOptions;
pub use contour::{Contour, Disk, EnclosureMode, QuadratureResult, SpectralEnclosure};
pub use holofun::{HoloFun1, HoloFun2};
pub use error::{Error, ErrorCategory, Result};
pub use num_complex::Complex64;
pub use numcore::{ComplexMatrix, TransformatorMatrix};
