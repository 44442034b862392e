//! Number systems and exact combinatorics shared by the analytic modules.

pub mod exact;
pub mod interval;
pub mod scalar;
pub mod sig17;
pub mod sum;

pub use interval::Interval;
pub use scalar::{ArithmeticMode, Scalar};
pub use sum::neumaier;
