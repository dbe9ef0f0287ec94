//! Floating-point building blocks shared by the evaluators.

pub mod ddouble;
pub mod expint;
pub mod quadrature;
pub mod sum;

pub use ddouble::DoubleDouble;
pub use sum::NeumaierSum;
