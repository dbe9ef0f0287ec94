use serde::{Deserialize, Serialize};

use super::Method;
use crate::error::Result;
use crate::numeric::NeumaierSum;
use crate::report;
use crate::weights::WeightVector;

/// A tabulation of `B(·|A)` on an ascending grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    #[serde(rename = "A")]
    pub weights: WeightVector,
    pub method: Method,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Estimated pointwise error of `values`.
    pub tolerance: f64,
}

impl DensityProfile {
    /// Left Riemann sum `Σ v_k (x_{k+1} − x_k)`; on a uniform grid this is
    /// `Σ values · step`, and it is exact for the `n = 1` indicator.
    pub fn mass(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| v * (w[1] - w[0]))
            .collect::<NeumaierSum>()
            .value()
    }

    /// Linear interpolation; zero outside the grid.
    pub fn interpolate(&self, x: f64) -> f64 {
        let g = &self.grid;
        if g.is_empty() || x < g[0] || x > g[g.len() - 1] {
            return 0.0;
        }
        let k = g.partition_point(|&t| t <= x);
        if k == 0 {
            return self.values[0];
        }
        if k == g.len() {
            return self.values[g.len() - 1];
        }
        let (x0, x1) = (g[k - 1], g[k]);
        let t = (x - x0) / (x1 - x0);
        self.values[k - 1] + t * (self.values[k] - self.values[k - 1])
    }

    /// Values with round-off negatives clamped to zero.
    pub fn clamped_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.max(0.0)).collect()
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let c = self.weights.center();
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| (v - self.interpolate(2.0 * c - x)).abs())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "value", "method"])?;
        let method = self.method.to_string();
        for (x, v) in self.grid.iter().zip(self.clamped_values()) {
            w.write_record([report::fmt_f64(*x), report::fmt_f64(v), method.clone()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut exported = self.clone();
        exported.values = self.clamped_values();
        report::to_json_string(&exported)
    }
}
