//! Kloosterman and Gauss sums over arbitrary moduli, weighted bilinear forms
//! built from them, exact solution counts for the congruences that control
//! their moments, and a harness that measures observed cancellation against
//! the known bounds.

pub mod bilinear;
pub mod counting;
pub mod dft;
pub mod error;
pub mod expsums;
pub mod harness;
pub mod modmath;
pub mod summation;

pub use error::{Error, Result};
pub use modmath::Modulus;
pub use summation::{SumAccumulator, SumResult};
