//! Point and grid evaluation of the univariate box spline `B(x|A)`, the
//! section function `φ_A(r) = B(r + Σa_j/2 | A)`, and its maximum.

mod convolution;
mod fourier;
mod profile;
mod section_mc;
mod truncated_power;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use convolution::{auto_step, eval_convolution, DEFAULT_CONVOLUTION_STEP};
pub use fourier::{eval_fourier, FourierEval, DEFAULT_FREQ_CUTOFF, DEFAULT_QUAD_TOL};
pub use profile::DensityProfile;
pub use section_mc::{section_volume_mc, SectionEstimate};
pub use truncated_power::{eval_truncated_power, truncated_power_raw, TRUNCATED_POWER_MAX_N};

use crate::error::{Error, Result};
use crate::saddlepoint::{gaussian_limit, saddle_density};
use crate::weights::WeightVector;

/// How `B(·|A)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    TruncatedPower,
    Convolution,
    Fourier,
    Saddle,
    Gaussian,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::TruncatedPower,
        Method::Convolution,
        Method::Fourier,
        Method::Saddle,
        Method::Gaussian,
    ];

    /// The most accurate evaluator available for `n` weights.
    pub fn exact_for(n: usize) -> Method {
        if n <= TRUNCATED_POWER_MAX_N {
            Method::TruncatedPower
        } else {
            Method::Convolution
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::TruncatedPower => "truncated_power",
            Method::Convolution => "convolution",
            Method::Fourier => "fourier",
            Method::Saddle => "saddle",
            Method::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown method '{s}'")))
    }
}

/// `B(x|A)` at each abscissa, in input order.
///
/// The convolution method tabulates once at [`auto_step`] and interpolates.
pub fn evaluate_many(a: &WeightVector, xs: &[f64], method: Method) -> Result<Vec<f64>> {
    match method {
        Method::Convolution => {
            let p = eval_convolution(a, auto_step(a))?;
            Ok(xs.iter().map(|&x| p.interpolate(x)).collect())
        }
        _ => xs.par_iter().map(|&x| evaluate(a, x, method)).collect(),
    }
}

/// `B(x|A)` by a single method.
pub fn evaluate(a: &WeightVector, x: f64, method: Method) -> Result<f64> {
    match method {
        Method::TruncatedPower => eval_truncated_power(a, x),
        Method::Convolution => Ok(evaluate_many(a, &[x], method)?[0]),
        Method::Fourier => Ok(eval_fourier(a, x, DEFAULT_FREQ_CUTOFF, DEFAULT_QUAD_TOL)?.value),
        Method::Saddle => {
            if x <= 0.0 || x >= a.total() {
                Ok(0.0)
            } else {
                saddle_density(a, x)
            }
        }
        Method::Gaussian => Ok(gaussian_limit(a, x)),
    }
}

/// Profile of `B(·|A)` on an explicit ascending grid.
pub fn profile_on_grid(a: &WeightVector, grid: Vec<f64>, method: Method) -> Result<DensityProfile> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation("grid must be strictly ascending".into()));
    }
    let values = evaluate_many(a, &grid, method)?;
    Ok(DensityProfile {
        weights: a.clone(),
        method,
        grid,
        values,
        tolerance: method_tolerance(a, method),
    })
}

/// Nominal pointwise accuracy of each evaluator at its default settings.
pub fn method_tolerance(a: &WeightVector, method: Method) -> f64 {
    match method {
        Method::TruncatedPower => 1e-9,
        Method::Convolution => {
            let h = auto_step(a);
            // second-difference bound of the interpolant, observed O(h²) constant
            (h * h / (a.smallest() * a.smallest())).max(1e-10)
        }
        Method::Fourier => 1e-7,
        // approximations, not evaluators: the error is what they measure
        Method::Saddle | Method::Gaussian => f64::INFINITY,
    }
}

/// Section function `φ_A(r) = B(r + Σa_j/2 | A)`, zero for `|r| >= Σa_j/2`.
pub fn phi(a: &WeightVector, r: f64, method: Method) -> Result<f64> {
    let c = a.center();
    if r.abs() >= c {
        return Ok(0.0);
    }
    evaluate(a, c + r, method)
}

/// `max_x B(x|A)`, evaluated at the center.
///
/// A probe at `center ± a_1/4` guards against evaluator bugs: `B` is
/// log-concave and symmetric, so neither probe may exceed the center value.
pub fn max_value(a: &WeightVector, method: Method) -> Result<f64> {
    let c = a.center();
    let q = a.smallest() / 4.0;
    let v = evaluate_many(a, &[c, c - q, c + q], method)?;
    let slack = 1e-9 * v[0].abs().max(1.0)
        + match method {
            Method::Convolution | Method::Fourier => method_tolerance(a, method),
            _ => 0.0,
        };
    if v[1] > v[0] + slack || v[2] > v[0] + slack {
        return Err(Error::Numerical(format!(
            "center value {} is below a neighbouring value ({}, {}) under {method}",
            v[0], v[1], v[2]
        )));
    }
    Ok(v[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn phi_examples() {
        let one = WeightVector::make_unit(&[1.0]).unwrap();
        assert_eq!(phi(&one, 0.25, Method::TruncatedPower).unwrap(), 1.0);
        let tp = WeightVector::make_unit(&[0.6, 0.8]).unwrap();
        assert_abs_diff_eq!(phi(&tp, 0.0, Method::TruncatedPower).unwrap(), 1.25, epsilon = 1e-13);
        let eq3 = WeightVector::equal(3).unwrap();
        let c = eq3.center();
        for m in Method::ALL {
            assert_eq!(phi(&eq3, c, m).unwrap(), 0.0);
            assert_eq!(phi(&eq3, -c, m).unwrap(), 0.0);
        }
    }

    #[test]
    fn phi_is_even() {
        let a = WeightVector::make_unit(&[0.2, 0.5, 0.7, 0.9]).unwrap();
        for r in [0.05, 0.3, 0.6] {
            let p = phi(&a, r, Method::TruncatedPower).unwrap();
            let m = phi(&a, -r, Method::TruncatedPower).unwrap();
            assert!((p - m).abs() < 1e-12);
        }
    }

    #[test]
    fn max_value_examples() {
        let one = WeightVector::make_unit(&[1.0]).unwrap();
        assert_eq!(max_value(&one, Method::TruncatedPower).unwrap(), 1.0);
        let two = WeightVector::equal(2).unwrap();
        assert_abs_diff_eq!(max_value(&two, Method::TruncatedPower).unwrap(), 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(max_value(&two, Method::Convolution).unwrap(), 2f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn method_tags_parse() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.as_str()));
        }
        assert!("spline".parse::<Method>().is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::test_runner::Config::with_cases(48))]

        #[test]
        fn symmetric_nonnegative_and_matches_fourier(
            raw in proptest::collection::vec(0.1f64..1.0, 2..8),
            t in 0.0f64..1.0,
        ) {
            let a = WeightVector::make_unit(&raw).unwrap();
            let x = t * a.total();
            let b = eval_truncated_power(&a, x).unwrap();
            let mirrored = eval_truncated_power(&a, a.total() - x).unwrap();
            proptest::prop_assert!(b >= -1e-12);
            proptest::prop_assert!((b - mirrored).abs() <= 1e-11);
            let f = eval_fourier(&a, x, DEFAULT_FREQ_CUTOFF, DEFAULT_QUAD_TOL).unwrap();
            proptest::prop_assert!((b - f.value).abs() <= 1e-7);
        }
    }
}
