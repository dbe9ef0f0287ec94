//! `E|Σ a_k ε_k|` for independent random signs, and the lower-bound
//! function `F(s) = (2/π) ∫_0^∞ (1 − |cos(t/√s)|^s) t^{−2} dt`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::quadrature::simpson_panels;
use crate::numeric::{DoubleDouble, NeumaierSum};
use crate::weights::WeightVector;

/// Largest `n` for full sign enumeration (non-uniform weights).
pub const ENUMERATION_MAX_N: usize = 26;
pub const MIN_MC_SAMPLES: u64 = 10_000;

const MC_CHUNK: u64 = 1 << 16;
// Sign bits fixed per parallel enumeration task.
const PREFIX_BITS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectationMethod {
    Exact,
    MonteCarlo,
}

impl std::fmt::Display for ExpectationMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExpectationMethod::Exact => "exact",
            ExpectationMethod::MonteCarlo => "monte_carlo",
        })
    }
}

impl std::str::FromStr for ExpectationMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ExpectationMethod::Exact),
            "monte_carlo" | "mc" => Ok(ExpectationMethod::MonteCarlo),
            _ => Err(Error::Validation(format!("unknown expectation method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RademacherSummary {
    pub n: usize,
    pub method: ExpectationMethod,
    pub expectation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

impl RademacherSummary {
    /// One-sided error allowance used when combining with other factors.
    pub fn error_allowance(&self) -> f64 {
        match self.stderr {
            Some(se) => 4.0 * se,
            None => 1e-12,
        }
    }
}

/// Exact expectation over all `2^n` sign patterns.
///
/// Equal weights use the binomial closed form `n·C(n−1, ⌊(n−1)/2⌋)/2^{n−1}`
/// (scaled by the common weight) and work for any `n`; otherwise `n <= 26`.
pub fn exact_expectation(a: &WeightVector) -> Result<RademacherSummary> {
    let n = a.len();
    let expectation = if a.is_uniform() {
        a.smallest() * equal_weight_mean_abs(n)
    } else if n <= ENUMERATION_MAX_N {
        enumerate(a.as_slice())
    } else {
        return Err(Error::Capability {
            what: "exact sign enumeration",
            cap: ENUMERATION_MAX_N,
            n,
            fallback: "the Monte Carlo estimator",
        });
    };
    Ok(RademacherSummary {
        n,
        method: ExpectationMethod::Exact,
        expectation,
        samples: None,
        stderr: None,
    })
}

/// `E|ε_1 + ... + ε_n|`.
fn equal_weight_mean_abs(n: usize) -> f64 {
    // n · C(n−1, m) / 2^{n−1}, m = ⌊(n−1)/2⌋, built as a running product
    // that halves as it goes so nothing overflows.
    let m = (n - 1) / 2;
    let mut value = n as f64;
    let mut halvings = n - 1;
    for i in 0..m {
        value *= (n - 1 - i) as f64 / (i + 1) as f64;
        while value > 1.0 && halvings > 0 {
            value *= 0.5;
            halvings -= 1;
        }
    }
    value * 0.5f64.powi(halvings as i32)
}

// ε_n is pinned to +1 (the pattern and its negation have equal |sum|).
// The next PREFIX_BITS signs are fixed per task; the rest are walked in
// Gray-code order with one double-double update per step.
fn enumerate(w: &[f64]) -> f64 {
    let n = w.len();
    if n == 1 {
        return w[0];
    }
    let free = &w[..n - 1];
    let prefix_bits = PREFIX_BITS.min(free.len());
    let (low, high) = free.split_at(free.len() - prefix_bits);
    let last = w[n - 1];

    let partials: Vec<NeumaierSum> = (0u64..1 << prefix_bits)
        .into_par_iter()
        .map(|mask| {
            let mut s = DoubleDouble::from_f64(last);
            for (bit, &a) in high.iter().enumerate() {
                s = s.add_f64(if mask >> bit & 1 == 1 { -a } else { a });
            }
            for &a in low {
                s = s.add_f64(a);
            }
            let mut acc = NeumaierSum::new();
            acc.add(s.abs().hi);
            acc.add(s.abs().lo);
            let mut minus: u64 = 0;
            for i in 1u64..1 << low.len() {
                let j = i.trailing_zeros() as usize;
                minus ^= 1 << j;
                let delta = 2.0 * low[j];
                s = s.add_f64(if minus >> j & 1 == 1 { -delta } else { delta });
                let v = s.abs();
                acc.add(v.hi);
                acc.add(v.lo);
            }
            acc
        })
        .collect();
    let mut total = NeumaierSum::new();
    for p in &partials {
        total.merge(p);
    }
    total.value() / (1u64 << (n - 1)) as f64
}

/// Sample mean of `|Σ a_k ε_k|` over `samples` draws.
///
/// Work is cut into fixed chunks of 65 536 draws, each with its own
/// ChaCha stream, so the result is bit-identical at any thread count.
pub fn mc_expectation(a: &WeightVector, samples: u64, seed: u64) -> Result<RademacherSummary> {
    if samples < MIN_MC_SAMPLES {
        return Err(Error::Validation(format!(
            "need at least {MIN_MC_SAMPLES} samples (got {samples})"
        )));
    }
    let w = a.as_slice();
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts: Vec<(NeumaierSum, NeumaierSum)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut sum = NeumaierSum::new();
            let mut sq = NeumaierSum::new();
            for _ in 0..count {
                let mut s = 0.0;
                for block in w.chunks(64) {
                    let bits: u64 = rng.gen();
                    for (k, &a) in block.iter().enumerate() {
                        s += if bits >> k & 1 == 1 { a } else { -a };
                    }
                }
                let v = s.abs();
                sum.add(v);
                sq.add(v * v);
            }
            (sum, sq)
        })
        .collect();
    let mut sum = NeumaierSum::new();
    let mut sq = NeumaierSum::new();
    for (s, q) in &parts {
        sum.merge(s);
        sq.merge(q);
    }
    let nf = samples as f64;
    let mean = sum.value() / nf;
    let var = ((sq.value() - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(RademacherSummary {
        n: w.len(),
        method: ExpectationMethod::MonteCarlo,
        expectation: mean,
        samples: Some(samples),
        stderr: Some((var / nf).sqrt()),
    })
}

/// Exact when possible, otherwise Monte Carlo with the given budget.
pub fn expectation(
    a: &WeightVector,
    method: ExpectationMethod,
    samples: u64,
    seed: u64,
) -> Result<RademacherSummary> {
    match method {
        ExpectationMethod::Exact => exact_expectation(a),
        ExpectationMethod::MonteCarlo => mc_expectation(a, samples, seed),
    }
}

/// `F(s)` with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FValue {
    pub s: f64,
    pub value: f64,
    pub quad_error: f64,
}

/// `F(s)` to absolute accuracy `tol`.
///
/// The integrand's numerator is π√s-periodic in `t`, so summing the
/// `t^{−2}` weight over periods with `Σ_k (u + kπ)^{−2} = sin^{−2} u` folds
/// the half-line onto one quarter period:
/// `F(s) = (2/(π√s)) ∫_0^{π/2} (1 − cos^s u) / sin² u du`.
/// The folded integrand is smooth, bounded by `s/2`, and needs no tail.
pub fn f_function(s: f64, tol: f64) -> Result<FValue> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Domain(format!("F(s) needs s > 0 (got {s})")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Validation(format!("tolerance must be > 0 (got {tol})")));
    }
    let prefactor = 2.0 / (std::f64::consts::PI * s.sqrt());
    let integrand = |u: f64| {
        if u < 1e-12 {
            return 0.5 * s;
        }
        let half = (0.5 * u).sin();
        // cos u = 1 − 2 sin²(u/2); rounding can push it just below 0 at π/2
        let log_cos = (-2.0 * half * half).max(-1.0).ln_1p();
        let sin_u = u.sin();
        -(s * log_cos).exp_m1() / (sin_u * sin_u)
    };
    // Panels resolve the 1/√s-wide peak at the origin.
    let quarter = std::f64::consts::FRAC_PI_2;
    let width = (quarter / 16.0).min(1.0 / s.sqrt());
    let panels = (quarter / width).ceil() as usize;
    let breaks: Vec<f64> = (0..=panels).map(|k| quarter * k as f64 / panels as f64).collect();
    // Leave half the budget as margin over the Richardson estimate.
    let r = simpson_panels(&integrand, &breaks, 0.5 * tol / prefactor);
    Ok(FValue {
        s,
        value: prefactor * r.value,
        quad_error: prefactor * r.error,
    })
}

/// Both lower bounds on the expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KhinchineBound {
    /// `F(a_n^{−2})`
    pub f_of_an: f64,
    /// `Σ a_k² F(a_k^{−2})`
    pub weighted_sum: f64,
    pub quad_error: f64,
}

pub fn khinchine_bounds(a: &WeightVector, tol: f64) -> Result<KhinchineBound> {
    let w = a.as_slice();
    // Equal weights share one quadrature.
    let mut terms: Vec<(f64, FValue)> = Vec::with_capacity(w.len());
    for &x in w {
        match terms.last() {
            Some(&(prev, f)) if prev == x => terms.push((x, f)),
            _ => terms.push((x, f_function(1.0 / (x * x), tol)?)),
        }
    }
    let top = terms[terms.len() - 1].1;
    let mut sum = NeumaierSum::new();
    let mut err = top.quad_error;
    for &(x, f) in &terms {
        sum.add(x * x * f.value);
        err += x * x * f.quad_error;
    }
    Ok(KhinchineBound {
        f_of_an: top.value,
        weighted_sum: sum.value(),
        quad_error: err,
    })
}
