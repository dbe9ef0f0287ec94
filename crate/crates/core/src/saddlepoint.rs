//! Cumulant generating function of `Σ a_j U_j` (`U_j` uniform on `[0,1)`),
//! the saddle equation `K'(s₀) = x`, the saddle-point density and the
//! Gaussian limit `√(6/π) exp(−6(x − Σa_j/2)²)`.
//!
//! Per factor, with `u = a s` and `y = u/2`,
//! `ln((e^u − 1)/u) = y + ln(sinh y / y)`, and the derivatives follow from
//! the Langevin function `L(y) = coth y − 1/y`. A Bernoulli series is used
//! for `|y| < 1/2`; the closed forms are overflow-free for large `|y|`.

use rayon::prelude::*;
use serde::Serialize;

use crate::boxspline::{evaluate_many, Method};
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::report;
use crate::weights::{FamilySpec, WeightVector};

/// `√(6/π)`, the peak of the limiting Gaussian.
pub const GAUSSIAN_PEAK: f64 = 1.381_976_597_885_342;

const SERIES_RADIUS: f64 = 0.5;
const MAX_NEWTON_ITER: usize = 100;

// c_k = 2^{2k} B_{2k} / (2k (2k)!) so that ln(sinh y / y) = Σ c_k y^{2k}.
const LOG_SINHC: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 180.0,
    1.0 / 2835.0,
    -1.0 / 37800.0,
    1.0 / 467_775.0,
    -691.0 / 3_831_077_250.0,
    2.0 / 127_702_575.0,
    -3617.0 / 2_605_132_530_000.0,
    43867.0 / 350_813_659_321_125.0,
    -174_611.0 / 15_313_294_652_906_250.0,
];

/// ln(sinh y / y) and its first three derivatives.
fn log_sinhc(y: f64) -> [f64; 4] {
    if y.abs() < SERIES_RADIUS {
        // Σ c_k y^{2k} and its termwise derivatives; `p` tracks y^{2k-4}.
        let y2 = y * y;
        let mut out = [0.0; 4];
        let mut p = 1.0;
        for (k, &c) in LOG_SINHC.iter().enumerate() {
            let e = (2 * (k + 1)) as f64;
            if k == 0 {
                // c y² : derivatives 2c y, 2c, 0
                out[0] += c * y2;
                out[1] += 2.0 * c * y;
                out[2] += 2.0 * c;
            } else {
                let y_e4 = p; // y^{e-4}
                out[0] += c * y_e4 * y2 * y2;
                out[1] += c * e * y_e4 * y2 * y;
                out[2] += c * e * (e - 1.0) * y_e4 * y2;
                out[3] += c * e * (e - 1.0) * (e - 2.0) * y_e4 * y;
            }
            p = if k == 0 { 1.0 } else { p * y2 };
        }
        return out;
    }
    let ay = y.abs();
    let value = ay + (-(-2.0 * ay).exp()).ln_1p() - std::f64::consts::LN_2 - ay.ln();
    let coth = 1.0 / y.tanh();
    let inv_sinh2 = {
        let s = y.sinh();
        1.0 / (s * s)
    };
    [
        value,
        coth - 1.0 / y,
        1.0 / (y * y) - inv_sinh2,
        2.0 * coth * inv_sinh2 - 2.0 / (y * y * y),
    ]
}

/// Per-factor `f(u) = ln((e^u − 1)/u)` and `f', f'', f'''`.
fn factor(u: f64) -> [f64; 4] {
    let y = 0.5 * u;
    let g = log_sinhc(y);
    [y + g[0], 0.5 * (1.0 + g[1]), 0.25 * g[2], 0.125 * g[3]]
}

/// `K(s) = Σ ln((e^{a_i s} − 1)/(a_i s))`, with `K(0) = 0`.
pub fn cgf(a: &WeightVector, s: f64) -> f64 {
    a.as_slice().iter().map(|&w| factor(w * s)[0]).collect::<NeumaierSum>().value()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgfDerivs {
    pub kp: f64,
    pub kpp: f64,
    pub kppp: f64,
}

/// `K'(s), K''(s), K'''(s)`.
pub fn cgf_derivs(a: &WeightVector, s: f64) -> CgfDerivs {
    let mut d = [NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new()];
    for &w in a.as_slice() {
        let f = factor(w * s);
        d[0].add(w * f[1]);
        d[1].add(w * w * f[2]);
        d[2].add(w * w * w * f[3]);
    }
    CgfDerivs {
        kp: d[0].value(),
        kpp: d[1].value(),
        kppp: d[2].value(),
    }
}

/// Converged root of `K'(s₀) = x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleSolution {
    pub x: f64,
    pub s0: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "Kp")]
    pub kp: f64,
    #[serde(rename = "Kpp")]
    pub kpp: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Safeguarded Newton iteration for `K'(s₀) = x`, `x` in `(0, Σa_j)`.
pub fn solve_saddle(a: &WeightVector, x: f64) -> Result<SaddleSolution> {
    let total = a.total();
    if !(x > 0.0 && x < total) {
        return Err(Error::Domain(format!(
            "no saddle point: x = {x} lies outside the open support (0, {total})"
        )));
    }
    let tol = 1e-12 * x.abs().max(1.0);
    let c = a.center();
    let kpp0 = a.norm_sq() / 12.0;
    let g = |s: f64| cgf_derivs(a, s).kp - x;

    // Bracket from the slope-12 linearization, widened by doubling.
    let mut s = (x - c) / kpp0;
    let mut step = s.abs().max(1.0);
    let (mut lo, mut hi);
    if g(s) < 0.0 {
        lo = s;
        hi = s + step;
        while g(hi) < 0.0 {
            lo = hi;
            step *= 2.0;
            hi += step;
            if !hi.is_finite() {
                return Err(Error::Numerical("failed to bracket the saddle point".into()));
            }
        }
    } else {
        hi = s;
        lo = s - step;
        while g(lo) > 0.0 {
            hi = lo;
            step *= 2.0;
            lo -= step;
            if !lo.is_finite() {
                return Err(Error::Numerical("failed to bracket the saddle point".into()));
            }
        }
    }

    for iter in 0..MAX_NEWTON_ITER {
        let d = cgf_derivs(a, s);
        let r = d.kp - x;
        if r.abs() <= tol {
            return Ok(SaddleSolution {
                x,
                s0: s,
                k: cgf(a, s),
                kp: d.kp,
                kpp: d.kpp,
                iterations: iter,
                residual: r.abs(),
            });
        }
        if r < 0.0 {
            lo = lo.max(s);
        } else {
            hi = hi.min(s);
        }
        let newton = s - r / d.kpp;
        s = if newton > lo && newton < hi && d.kpp > 0.0 {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * s.abs().max(1.0) && (s == lo || s == hi) {
            break;
        }
    }
    let d = cgf_derivs(a, s);
    Err(Error::Numerical(format!(
        "saddle solve did not converge in {MAX_NEWTON_ITER} iterations (x = {x}, residual = {})",
        (d.kp - x).abs()
    )))
}

/// `exp(K(s₀) − s₀ x) / √(2π K''(s₀))`, not renormalized.
pub fn saddle_density(a: &WeightVector, x: f64) -> Result<f64> {
    let sol = solve_saddle(a, x)?;
    Ok((sol.k - sol.s0 * x).exp() / (2.0 * std::f64::consts::PI * sol.kpp.abs()).sqrt())
}

/// `√(6/π) exp(−6 (x − Σa_j/2)²)`.
pub fn gaussian_limit(a: &WeightVector, x: f64) -> f64 {
    let t = x - a.center();
    GAUSSIAN_PEAK * (-6.0 * t * t).exp()
}

/// Finite-difference derivatives of `x ↦ s₀(x)` at the center, next to the
/// closed-form third derivative `864 Σa_j⁴ / 5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleTaylor {
    pub slope: f64,
    pub second: f64,
    pub third: f64,
    pub third_closed_form: f64,
    /// Relative disagreement of the two third-derivative values exceeds 20%.
    pub third_disagrees: bool,
}

pub fn saddle_taylor_at_center(a: &WeightVector, h: f64) -> Result<SaddleTaylor> {
    let c = a.center();
    let s = |x: f64| solve_saddle(a, x).map(|r| r.s0);
    let (m2, m1, z, p1, p2) = (s(c - 2.0 * h)?, s(c - h)?, s(c)?, s(c + h)?, s(c + 2.0 * h)?);
    let slope = (p1 - m1) / (2.0 * h);
    let second = (p1 - 2.0 * z + m1) / (h * h);
    let third = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h);
    let third_closed_form = 864.0 * a.as_slice().iter().map(|w| w.powi(4)).sum::<f64>() / 5.0;
    Ok(SaddleTaylor {
        slope,
        second,
        third,
        third_closed_form,
        third_disagrees: ((third - third_closed_form) / third_closed_form).abs() > 0.2,
    })
}

/// Grid for the convergence comparison: `center ± half_width_sigmas·σ`,
/// `σ = 1/√12`, with `points` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub half_width_sigmas: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_width_sigmas: 3.0,
            points: 601,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub n: usize,
    pub sup_distance: f64,
    pub l2_distance: f64,
    pub method_pair: (Method, Method),
    pub grid: String,
}

/// Distance between the exact box spline and the Gaussian limit for one vector.
pub fn convergence_for(a: &WeightVector, grid: GridSpec) -> Result<ConvergenceReport> {
    if grid.points < 2 || !(grid.half_width_sigmas > 0.0) {
        return Err(Error::Validation("convergence grid needs >= 2 points and a positive width".into()));
    }
    let sigma = 1.0 / 12f64.sqrt();
    let c = a.center();
    let half = grid.half_width_sigmas * sigma;
    let dx = 2.0 * half / (grid.points - 1) as f64;
    let xs: Vec<f64> = (0..grid.points).map(|k| c - half + k as f64 * dx).collect();
    let exact = Method::exact_for(a.len());
    let b = evaluate_many(a, &xs, exact)?;
    let diffs: Vec<f64> = xs.iter().zip(&b).map(|(&x, &v)| v - gaussian_limit(a, x)).collect();
    let sup = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let l2 = diffs
        .windows(2)
        .map(|w| 0.5 * dx * (w[0] * w[0] + w[1] * w[1]))
        .collect::<NeumaierSum>()
        .value()
        .sqrt();
    Ok(ConvergenceReport {
        n: a.len(),
        sup_distance: sup,
        l2_distance: l2,
        method_pair: (exact, Method::Gaussian),
        grid: format!(
            "center ± {}σ, {} points",
            grid.half_width_sigmas, grid.points
        ),
    })
}

/// One report per family member, in input order.
pub fn convergence_report(family: &[FamilySpec], grid: GridSpec) -> Result<Vec<ConvergenceReport>> {
    family
        .par_iter()
        .map(|spec| convergence_for(&spec.generate()?, grid))
        .collect()
}

pub fn write_convergence_csv<W: std::io::Write>(reports: &[ConvergenceReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "sup_distance", "l2_distance", "pair"])?;
    for r in reports {
        w.write_record([
            r.n.to_string(),
            report::fmt_f64(r.sup_distance),
            report::fmt_f64(r.l2_distance),
            format!("{}/{}", r.method_pair.0, r.method_pair.1),
        ])?;
    }
    w.flush()?;
    Ok(())
}
