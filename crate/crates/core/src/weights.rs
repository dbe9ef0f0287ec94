//! Unit weight vectors `A = (a_1, ..., a_n)` with `0 < a_1 <= ... <= a_n`
//! and `Σ a_j² = 1`, plus the deterministic families used by the scans.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|Σ a_j² − 1|` for a constructed vector.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Sorted, strictly positive, unit-norm weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Sort ascending and rescale to unit Euclidean norm.
    pub fn make_unit(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Validation("weight list is empty".into()));
        }
        if let Some(bad) = raw.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Validation(format!(
                "weights must be finite and strictly positive (got {bad})"
            )));
        }
        let sorted = raw.windows(2).all(|p| p[0] <= p[1]);
        let norm_sq = raw.iter().map(|v| v * v).sum::<f64>();
        if sorted && (norm_sq - 1.0).abs() <= NORM_TOLERANCE {
            return Ok(Self(raw.to_vec()));
        }
        let mut w = raw.to_vec();
        w.sort_by(f64::total_cmp);
        // Scale by the largest entry first so the squared sum cannot overflow.
        let top = w[w.len() - 1];
        w.iter_mut().for_each(|v| *v /= top);
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        w.iter_mut().for_each(|v| *v /= norm);
        let v = Self(w);
        // One more pass if rounding left the norm outside tolerance.
        if (v.norm_sq() - 1.0).abs() > NORM_TOLERANCE {
            let norm = v.norm_sq().sqrt();
            return Ok(Self(v.0.iter().map(|x| x / norm).collect()));
        }
        Ok(v)
    }

    /// `n` copies of `1/√n`.
    pub fn equal(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("n must be at least 1".into()));
        }
        Self::make_unit(&vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn smallest(&self) -> f64 {
        self.0[0]
    }

    pub fn largest(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// `Σ a_j`, the right end of the support of `B(·|A)`.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Symmetry center `Σ a_j / 2`.
    pub fn center(&self) -> f64 {
        self.0.iter().map(|a| 0.5 * a).sum()
    }

    /// `a_n / a_1`.
    pub fn ratio(&self) -> f64 {
        self.largest() / self.smallest()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum()
    }

    /// True when every weight is bit-identical (the equal-weight family).
    pub fn is_uniform(&self) -> bool {
        self.0.iter().all(|&a| a == self.0[0])
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::make_unit(&v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(v: WeightVector) -> Self {
        v.0
    }
}

/// Parametric families of weight vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FamilySpec {
    Equal { n: usize },
    /// `a_j ∝ q^{j-1}`, so `a_n / a_1 = q^{n-1}` (after sorting when `q < 1`).
    Geometric { n: usize, q: f64 },
    /// I.i.d. uniform draws on `[1, c0]`, sorted and normalized.
    Random { n: usize, c0: f64, seed: u64 },
}

impl FamilySpec {
    pub fn n(&self) -> usize {
        match *self {
            FamilySpec::Equal { n } | FamilySpec::Geometric { n, .. } | FamilySpec::Random { n, .. } => n,
        }
    }

    pub fn generate(&self) -> Result<WeightVector> {
        if self.n() == 0 {
            return Err(Error::Validation("n must be at least 1".into()));
        }
        match *self {
            FamilySpec::Equal { n } => WeightVector::equal(n),
            FamilySpec::Geometric { n, q } => {
                if !(q.is_finite() && q > 0.0) {
                    return Err(Error::Validation(format!("geometric ratio must be > 0 (got {q})")));
                }
                let raw: Vec<f64> = (0..n).map(|j| q.powi(j as i32)).collect();
                WeightVector::make_unit(&raw)
            }
            FamilySpec::Random { n, c0, seed } => {
                if !(c0.is_finite() && c0 >= 1.0) {
                    return Err(Error::Validation(format!("ratio cap c0 must be >= 1 (got {c0})")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let raw: Vec<f64> = (0..n)
                    .map(|_| if c0 > 1.0 { rng.gen_range(1.0..=c0) } else { 1.0 })
                    .collect();
                WeightVector::make_unit(&raw)
            }
        }
    }
}

/// Free-function form of [`WeightVector::make_unit`].
pub fn make_unit(raw: &[f64]) -> Result<WeightVector> {
    WeightVector::make_unit(raw)
}

pub fn center(a: &WeightVector) -> f64 {
    a.center()
}

pub fn ratio(a: &WeightVector) -> f64 {
    a.ratio()
}

pub fn generate(spec: &FamilySpec) -> Result<WeightVector> {
    spec.generate()
}

/// SplitMix64 step; derives independent per-trial seeds from a base seed.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
