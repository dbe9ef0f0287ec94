//! Univariate box splines, central sections of the cube, saddle-point
//! densities and the Rademacher gap functional
//! `G(A) = φ_A(0)·E|Σ a_k ε_k| − 1` over unit weight vectors.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boxspline;
pub mod cli;
pub mod error;
pub mod mahler_gap;
pub mod numeric;
pub mod rademacher;
pub mod report;
pub mod saddlepoint;
pub mod weights;

pub use boxspline::{evaluate, max_value, phi, DensityProfile, Method};
pub use error::{Error, Result};
pub use mahler_gap::{gap, minimize_gap, scan_random, threshold_probe, verify, GapReport};
pub use rademacher::{exact_expectation, f_function, ExpectationMethod};
pub use saddlepoint::{saddle_density, solve_saddle, GAUSSIAN_PEAK};
pub use weights::{FamilySpec, WeightVector};
