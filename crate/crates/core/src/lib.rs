//! Stacked Alamouti (stacked OSTBC) transmission: equivalent-channel algebra,
//! closed-form capacity and rate bounds, and an ML / ZF / LLL-aided ZF
//! detection bench.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod detect;
pub mod error;
pub mod channel;
pub mod numerics;
pub mod simlab;
pub mod inforate;
pub mod stcodes;

pub use error::{Error, Result};
pub use numerics::{Complex64, ComplexMatrix, RealMatrix};
