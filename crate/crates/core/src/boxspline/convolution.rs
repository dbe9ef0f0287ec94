//! `B(·|A)` as the n-fold convolution of the uniform densities on
//! `[0, a_j]`, tabulated on a uniform grid over `[0, Σ a_j]`.
//!
//! Each step replaces `f` by the sliding window average
//! `g(x) = (1/a) ∫_{x−a}^{x} f`, integrating the piecewise-linear
//! interpolant of `f` exactly. The first two factors are done in closed
//! form, so the scheme carries O(h²) error and no FFT.

use super::{DensityProfile, Method};
use crate::error::{Error, Result};
use crate::numeric::DoubleDouble;
use crate::weights::WeightVector;

/// Default grid step for convolution fallbacks.
pub const DEFAULT_CONVOLUTION_STEP: f64 = 1e-4;

/// Step used when the caller does not pick one: the default, capped at `a_1/8`.
pub fn auto_step(a: &WeightVector) -> f64 {
    DEFAULT_CONVOLUTION_STEP.min(a.smallest() / 8.0)
}

/// Convolution profile with the given step (`0 < step <= a_1/8`).
///
/// The grid spacing is `Σa_j / N` for the smallest even `N` with spacing no
/// larger than `grid_step`, so the center is always a node. The reported
/// tolerance is a Richardson estimate from a companion run at twice the
/// spacing.
pub fn eval_convolution(a: &WeightVector, grid_step: f64) -> Result<DensityProfile> {
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::Validation(format!("grid step must be positive (got {grid_step})")));
    }
    if grid_step > a.smallest() / 8.0 {
        return Err(Error::Validation(format!(
            "grid step {grid_step} is too coarse; need step <= a_1/8 = {}",
            a.smallest() / 8.0
        )));
    }
    let total = a.total();
    let mut intervals = (total / grid_step).ceil() as usize;
    intervals = intervals.max(2);
    intervals += intervals % 2;
    let fine = convolve(a.as_slice(), total, intervals);
    let coarse = convolve(a.as_slice(), total, intervals / 2);
    let tolerance = coarse
        .iter()
        .enumerate()
        .map(|(k, c)| (fine[2 * k] - c).abs() / 3.0)
        .fold(0.0, f64::max);
    let h = total / intervals as f64;
    let grid = (0..=intervals).map(|k| k as f64 * h).collect();
    Ok(DensityProfile {
        weights: a.clone(),
        method: Method::Convolution,
        grid,
        values: fine,
        tolerance,
    })
}

fn convolve(weights: &[f64], total: f64, intervals: usize) -> Vec<f64> {
    let h = total / intervals as f64;
    let node = |k: usize| k as f64 * h;
    let a1 = weights[0];
    if weights.len() == 1 {
        let mut v = vec![1.0 / a1; intervals + 1];
        v[intervals] = 0.0;
        return v;
    }
    // Exact two-fold convolution (trapezoid) from the uniform CDF.
    let cdf1 = |y: f64| y.clamp(0.0, a1) / a1;
    let a2 = weights[1];
    let mut f: Vec<f64> = (0..=intervals)
        .map(|k| (cdf1(node(k)) - cdf1(node(k) - a2)) / a2)
        .collect();
    let mut cumulative = vec![DoubleDouble::ZERO; intervals + 1];
    for &a in &weights[2..] {
        for k in 0..intervals {
            cumulative[k + 1] = cumulative[k].add_f64(0.5 * h * (f[k] + f[k + 1]));
        }
        let antiderivative = |y: f64| -> DoubleDouble {
            if y <= 0.0 {
                return DoubleDouble::ZERO;
            }
            let s = y / h;
            let k = (s.floor() as usize).min(intervals - 1);
            let t = s - k as f64;
            cumulative[k].add_f64(h * t * (f[k] + 0.5 * t * (f[k + 1] - f[k])))
        };
        let next: Vec<f64> = (0..=intervals)
            .map(|k| ((cumulative[k] - antiderivative(node(k) - a)).to_f64() / a).max(0.0))
            .collect();
        f = next;
    }
    f[0] = 0.0;
    f[intervals] = 0.0;
    f
}
