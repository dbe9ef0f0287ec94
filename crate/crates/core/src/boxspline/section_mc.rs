//! Monte Carlo slab volume: `vol{u ∈ [−½,½]^n : |⟨A,u⟩ − r| <= δ} / (2δ)`,
//! which tends to `φ_A(r)` as `δ → 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::weights::WeightVector;

pub const MIN_SAMPLES: u64 = 10_000;
// Samples per RNG stream; fixed so results do not depend on thread count.
pub(crate) const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub half_width: f64,
}

pub fn section_volume_mc(
    a: &WeightVector,
    r: f64,
    half_width: f64,
    samples: u64,
    seed: u64,
) -> Result<SectionEstimate> {
    if !(half_width > 0.0 && half_width <= a.smallest() / 4.0) {
        return Err(Error::Validation(format!(
            "slab half-width must lie in (0, a_1/4] = (0, {}] (got {half_width})",
            a.smallest() / 4.0
        )));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::Validation(format!("need at least {MIN_SAMPLES} samples (got {samples})")));
    }
    let w = a.as_slice();
    let chunks = samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = CHUNK.min(samples - chunk * CHUNK);
            let mut hits = 0u64;
            for _ in 0..count {
                let dot: f64 = w.iter().map(|&a| a * (rng.gen::<f64>() - 0.5)).sum();
                if (dot - r).abs() <= half_width {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p = hits as f64 / samples as f64;
    let width = 2.0 * half_width;
    Ok(SectionEstimate {
        estimate: p / width,
        stderr: (p * (1.0 - p) / samples as f64).sqrt() / width,
        samples,
        half_width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_slab() {
        let a = WeightVector::make_unit(&[1.0]).unwrap();
        let e = section_volume_mc(&a, 0.0, 0.1, 100_000, 3).unwrap();
        assert!((e.estimate - 1.0).abs() <= 4.0 * e.stderr + 1e-12, "{e:?}");
    }

    #[test]
    fn deterministic_given_seed() {
        let a = WeightVector::equal(3).unwrap();
        let x = section_volume_mc(&a, 0.2, 0.05, 50_000, 11).unwrap();
        let y = section_volume_mc(&a, 0.2, 0.05, 50_000, 11).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn validation() {
        let a = WeightVector::equal(2).unwrap();
        assert!(section_volume_mc(&a, 0.0, 0.5, 100_000, 1).is_err());
        assert!(section_volume_mc(&a, 0.0, 0.0, 100_000, 1).is_err());
        assert!(section_volume_mc(&a, 0.0, 0.1, 100, 1).is_err());
    }
}
