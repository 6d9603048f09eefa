//! Exact arithmetic, prime sieves, Diophantine approximation and
//! exponential-sum verifiers over the rings of integers of the nine imaginary
//! quadratic fields with class number one.

pub mod error;
pub mod fixed;
pub mod hiprec;
pub mod arith;
pub mod dioph;
pub mod expsum;
pub mod hsieve;
pub mod lab;
pub mod qfield;
pub mod smooth;
pub mod special;

pub use error::{Error, Result};
pub use fixed::Fixed;
pub use hiprec::HiReal;
pub use qfield::{AlphaCoords, FieldCtx, OmegaKind, RingElt};
