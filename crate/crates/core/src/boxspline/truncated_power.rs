//! Closed-form evaluation of `B(x|A)` by inclusion-exclusion over subsets:
//!
//! `B(x|A) = Σ_S (−1)^{|S|} (x − Σ_{j∈S} a_j)_+^{n−1} / ((n−1)! Π a_j)`.
//!
//! The alternating sum cancels catastrophically as `n` grows, so partial
//! sums, powers and the accumulator are all carried in double-double.
//! Subsets are walked depth-first over ascending weights, which gives an
//! O(1) partial-sum update per subset and prunes every branch whose partial
//! sum already exceeds `x`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::DoubleDouble;
use crate::weights::WeightVector;

/// Largest `n` accepted by [`eval_truncated_power`].
pub const TRUNCATED_POWER_MAX_N: usize = 24;

// Number of largest weights whose membership is fixed per parallel task.
const SPLIT_BITS: usize = 6;
const PARALLEL_MIN_N: usize = 14;

/// `B(x|A)` by the truncated-power formula; `n <= 24`.
pub fn eval_truncated_power(a: &WeightVector, x: f64) -> Result<f64> {
    if a.len() > TRUNCATED_POWER_MAX_N {
        return Err(Error::Capability {
            what: "truncated-power evaluation",
            cap: TRUNCATED_POWER_MAX_N,
            n: a.len(),
            fallback: "the convolution evaluator",
        });
    }
    Ok(truncated_power_raw(a.as_slice(), x))
}

/// Truncated-power formula for arbitrary positive weights sorted ascending
/// (no unit-norm requirement, no size cap).
///
/// Support is the half-open interval `[0, Σ a_j)`; for `n = 1` the value at
/// `0` is the right limit.
pub fn truncated_power_raw(weights: &[f64], x: f64) -> f64 {
    debug_assert!(weights.windows(2).all(|w| w[0] <= w[1]));
    let n = weights.len();
    if n == 0 || !x.is_finite() {
        return 0.0;
    }
    let total: f64 = weights.iter().sum();
    if x < 0.0 || x >= total {
        return 0.0;
    }
    let degree = (n - 1) as u32;
    let x_dd = DoubleDouble::from_f64(x);

    let sum = if n >= PARALLEL_MIN_N {
        let split = SPLIT_BITS.min(n - 1);
        let (low, high) = weights.split_at(n - split);
        let partials: Vec<DoubleDouble> = (0u32..1 << split)
            .into_par_iter()
            .map(|mask| {
                let mut offset = DoubleDouble::ZERO;
                let mut odd = false;
                for (bit, &w) in high.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        offset = offset.add_f64(w);
                        odd = !odd;
                    }
                }
                let mut acc = DoubleDouble::ZERO;
                if (x_dd - offset).is_positive() || (degree == 0 && !(x_dd - offset).is_negative()) {
                    walk(low, 0, offset, odd, x_dd, degree, &mut acc);
                }
                acc
            })
            .collect();
        partials.into_iter().fold(DoubleDouble::ZERO, |s, p| s + p)
    } else {
        let mut acc = DoubleDouble::ZERO;
        walk(weights, 0, DoubleDouble::ZERO, false, x_dd, degree, &mut acc);
        acc
    };

    let mut denom = DoubleDouble::ONE;
    for (k, &w) in weights.iter().enumerate() {
        denom = denom.mul_f64(w);
        if k >= 1 {
            denom = denom.mul_f64(k as f64);
        }
    }
    (sum / denom).to_f64().max(0.0)
}

// Adds the term for the current subset, then extends it by each later
// weight while the partial sum stays below `x`.
fn walk(
    weights: &[f64],
    start: usize,
    partial: DoubleDouble,
    odd: bool,
    x: DoubleDouble,
    degree: u32,
    acc: &mut DoubleDouble,
) {
    let y = x - partial;
    let term = if degree == 0 {
        if y.is_negative() {
            return;
        }
        DoubleDouble::ONE
    } else {
        if !y.is_positive() {
            return;
        }
        y.powi(degree)
    };
    *acc = if odd { *acc - term } else { *acc + term };
    for j in start..weights.len() {
        let next = partial.add_f64(weights[j]);
        let rest = x - next;
        let alive = if degree == 0 { !rest.is_negative() } else { rest.is_positive() };
        if !alive {
            // weights ascend, so every later extension is dead too
            break;
        }
        walk(weights, j + 1, next, !odd, x, degree, acc);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_interval_indicator() {
        let a = WeightVector::make_unit(&[1.0]).unwrap();
        assert_eq!(eval_truncated_power(&a, 0.5).unwrap(), 1.0);
        assert_eq!(eval_truncated_power(&a, 0.0).unwrap(), 1.0);
        assert_eq!(eval_truncated_power(&a, 1.0).unwrap(), 0.0);
        assert_eq!(eval_truncated_power(&a, -1e-300).unwrap(), 0.0);
    }

    #[test]
    fn hat_function_peak() {
        let a = WeightVector::equal(2).unwrap();
        let v = eval_truncated_power(&a, a.center()).unwrap();
        assert_abs_diff_eq!(v, 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn three_equal_weights_at_center() {
        // √3 · M_3(3/2) with M_3(3/2) = 3/4
        let a = WeightVector::equal(3).unwrap();
        let v = eval_truncated_power(&a, a.center()).unwrap();
        assert_abs_diff_eq!(v, 3.0 * 3f64.sqrt() / 4.0, epsilon = 1e-14);
    }

    #[test]
    fn trapezoid_plateau() {
        let a = WeightVector::make_unit(&[0.6, 0.8]).unwrap();
        for x in [0.6, 0.65, 0.7, 0.79] {
            assert_abs_diff_eq!(eval_truncated_power(&a, x).unwrap(), 1.25, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(eval_truncated_power(&a, 0.3).unwrap(), 0.625, epsilon = 1e-13);
    }

    #[test]
    fn rejects_large_n() {
        let a = WeightVector::equal(25).unwrap();
        assert!(matches!(eval_truncated_power(&a, 1.0), Err(Error::Capability { .. })));
    }

    // Cardinal B-spline at an integer knot, exact integer arithmetic:
    // M_n(m) = Σ_k (−1)^k C(n,k) (m−k)^{n−1} / (n−1)!
    fn cardinal_at_integer(n: u32, m: i128) -> f64 {
        let mut binom: i128 = 1;
        let mut acc: i128 = 0;
        for k in 0..m.min(n as i128 + 1) {
            let term = binom * (m - k).pow(n - 1);
            acc += if k % 2 == 0 { term } else { -term };
            binom = binom * (n as i128 - k) / (k + 1);
        }
        let fact: i128 = (1..n as i128).product();
        acc as f64 / fact as f64
    }

    #[test]
    fn serial_and_parallel_paths_match_integer_oracle() {
        for n in [5u32, 13, 14, 18] {
            let a = WeightVector::equal(n as usize).unwrap();
            let want = (n as f64).sqrt() * cardinal_at_integer(n, (n / 2) as i128);
            // integer knots of the scaled spline sit at j/√n
            let x = (n / 2) as f64 / (n as f64).sqrt();
            let v = eval_truncated_power(&a, x).unwrap();
            assert!((v - want).abs() < 1e-12, "n={n}: {v} vs {want}");
        }
    }

    #[test]
    fn full_range_stays_accurate_at_cap() {
        let a = WeightVector::equal(24).unwrap();
        let c = a.center();
        let lo = eval_truncated_power(&a, c - 0.3).unwrap();
        let hi = eval_truncated_power(&a, c + 0.3).unwrap();
        assert!((lo - hi).abs() < 1e-9);
        let peak = eval_truncated_power(&a, c).unwrap();
        assert!(peak > 1.35 && peak < 1.3820);
    }
}
