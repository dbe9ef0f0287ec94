//! The gap functional `G(A) = φ_A(0)·E|Σ a_k ε_k| − 1`, its verification,
//! randomized scans, local minimization and the threshold probe.

use rayon::prelude::*;
use serde::Serialize;

use crate::boxspline::{
    auto_step, eval_convolution, eval_fourier, max_value, method_tolerance, phi, Method,
    DEFAULT_FREQ_CUTOFF, TRUNCATED_POWER_MAX_N,
};
use crate::error::{Error, Result};
use crate::rademacher::{
    exact_expectation, expectation, f_function, ExpectationMethod, RademacherSummary, ENUMERATION_MAX_N,
};
use crate::saddlepoint::GAUSSIAN_PEAK;
use crate::weights::{mix_seed, FamilySpec, WeightVector};

/// Quadrature tolerance for `F` inside gap reports.
pub const BOUND_TOL: f64 = 1e-10;
pub const DEFAULT_MC_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_GAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapOptions {
    pub phi_method: Method,
    pub exp_method: ExpectationMethod,
    pub mc_samples: u64,
    pub seed: u64,
}

impl GapOptions {
    /// Most accurate evaluators available for `n` weights.
    pub fn best_for(a: &WeightVector) -> Self {
        let exact_e = a.is_uniform() || a.len() <= ENUMERATION_MAX_N;
        Self {
            phi_method: Method::exact_for(a.len()),
            exp_method: if exact_e {
                ExpectationMethod::Exact
            } else {
                ExpectationMethod::MonteCarlo
            },
            mc_samples: DEFAULT_MC_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    #[serde(rename = "A")]
    pub weights: WeightVector,
    pub phi0: f64,
    pub expectation: f64,
    pub gap: f64,
    pub phi_method: Method,
    pub exp_method: ExpectationMethod,
    /// `φ_A(0)·F(a_n^{−2}) − 1`
    pub lower_bound_gap: f64,
    pub f_of_an: f64,
    /// Error budget of `gap`.
    pub tolerance: f64,
    /// Additional error budget of `lower_bound_gap` (quadrature of `F`).
    pub lower_bound_tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectation_stderr: Option<f64>,
}

pub fn gap(a: &WeightVector, phi_method: Method, exp_method: ExpectationMethod) -> Result<GapReport> {
    let mut opts = GapOptions::best_for(a);
    opts.phi_method = phi_method;
    opts.exp_method = exp_method;
    gap_with(a, &opts)
}

pub fn gap_with(a: &WeightVector, opts: &GapOptions) -> Result<GapReport> {
    if matches!(opts.phi_method, Method::Saddle | Method::Gaussian) {
        return Err(Error::Validation(format!(
            "{} is an approximation, not an evaluator; the gap needs truncated_power, convolution or fourier",
            opts.phi_method
        )));
    }
    let phi0 = phi(a, 0.0, opts.phi_method)?;
    let e: RademacherSummary = expectation(a, opts.exp_method, opts.mc_samples, opts.seed)?;
    let f = f_function(1.0 / (a.largest() * a.largest()), BOUND_TOL)?;
    let tolerance = method_tolerance(a, opts.phi_method) * e.expectation + phi0 * e.error_allowance();
    Ok(GapReport {
        weights: a.clone(),
        phi0,
        expectation: e.expectation,
        gap: phi0 * e.expectation - 1.0,
        phi_method: opts.phi_method,
        exp_method: e.method,
        lower_bound_gap: phi0 * f.value - 1.0,
        f_of_an: f.value,
        tolerance,
        lower_bound_tolerance: phi0 * f.quad_error,
        expectation_stderr: e.stderr,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    /// `gap >= −tol`.
    pub holds: bool,
    /// The report's own error budget fits inside `tol`.
    pub conclusive: bool,
    pub tol: f64,
    pub report: GapReport,
}

pub fn verify(a: &WeightVector, tol: f64) -> Result<Verification> {
    verify_with(a, tol, &GapOptions::best_for(a))
}

pub fn verify_with(a: &WeightVector, tol: f64, opts: &GapOptions) -> Result<Verification> {
    if !(tol > 0.0) {
        return Err(Error::Validation(format!("tolerance must be > 0 (got {tol})")));
    }
    let report = gap_with(a, opts)?;
    Ok(Verification {
        holds: report.gap >= -tol,
        conclusive: report.tolerance <= tol,
        tol,
        report,
    })
}

/// Independent re-evaluation of a negative gap with every exact evaluator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateCheck {
    #[serde(rename = "A")]
    pub weights: WeightVector,
    /// `(method, gap, tolerance)` per evaluator that could run.
    pub gaps: Vec<(Method, f64, f64)>,
    /// Every evaluator puts the gap below `−(tol + its own tolerance)`.
    pub confirmed: bool,
}

pub fn recheck_candidate(a: &WeightVector, tol: f64) -> Result<CandidateCheck> {
    let e = exact_expectation(a).or_else(|_| crate::rademacher::mc_expectation(a, 4 * DEFAULT_MC_SAMPLES, 1))?;
    let allowance = e.error_allowance();
    let c = a.center();
    let mut gaps = Vec::new();
    if a.len() <= TRUNCATED_POWER_MAX_N {
        let v = phi(a, 0.0, Method::TruncatedPower)?;
        gaps.push((Method::TruncatedPower, v * e.expectation - 1.0, v * allowance + 1e-12));
    }
    let conv = eval_convolution(a, 0.5 * auto_step(a))?;
    let v = conv.interpolate(c);
    gaps.push((Method::Convolution, v * e.expectation - 1.0, (conv.tolerance + 1e-12) * e.expectation + v * allowance));
    let f = eval_fourier(a, c, 2.0 * DEFAULT_FREQ_CUTOFF, 1e-11)?;
    gaps.push((Method::Fourier, f.value * e.expectation - 1.0, f.error_bound * e.expectation + f.value * allowance));
    let confirmed = gaps.iter().all(|&(_, g, t)| g < -(tol + t));
    Ok(CandidateCheck {
        weights: a.clone(),
        gaps,
        confirmed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub trial: usize,
    pub gap: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapHistogram {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// `(lower edge, upper edge, count)` over ten equal-width bins.
    pub bins: Vec<(f64, f64, usize)>,
}

impl GapHistogram {
    fn from_gaps(gaps: &[f64]) -> Self {
        let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        let max = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let nbins = 10;
        let width = (max - min) / nbins as f64;
        let mut bins: Vec<(f64, f64, usize)> = (0..nbins)
            .map(|k| (min + k as f64 * width, min + (k + 1) as f64 * width, 0))
            .collect();
        for &g in gaps {
            let k = if width > 0.0 {
                (((g - min) / width) as usize).min(nbins - 1)
            } else {
                0
            };
            bins[k].2 += 1;
        }
        Self { min, max, mean, bins }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub n: usize,
    pub c0: f64,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub argmin_trial: usize,
    pub min: GapReport,
    pub histogram: GapHistogram,
    /// Trials whose gap fell below `−tol`, each re-checked.
    pub candidates: Vec<CandidateCheck>,
    #[serde(skip)]
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    pub fn has_confirmed_violation(&self) -> bool {
        self.candidates.iter().any(|c| c.confirmed)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["trial", "gap", "ratio"])?;
        for r in &self.rows {
            w.write_record([r.trial.to_string(), crate::report::fmt_f64(r.gap), crate::report::fmt_f64(r.ratio)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Random family member for trial `trial` of a scan seeded with `seed`.
pub fn scan_member(n: usize, c0: f64, seed: u64, trial: usize) -> FamilySpec {
    FamilySpec::Random {
        n,
        c0,
        seed: mix_seed(seed, trial as u64),
    }
}

pub fn scan_random(n: usize, c0: f64, trials: usize, seed: u64) -> Result<ScanResult> {
    scan_random_with_tol(n, c0, trials, seed, DEFAULT_GAP_TOL)
}

pub fn scan_random_with_tol(n: usize, c0: f64, trials: usize, seed: u64, tol: f64) -> Result<ScanResult> {
    if trials == 0 {
        return Err(Error::Validation("need at least one trial".into()));
    }
    if n > ENUMERATION_MAX_N {
        return Err(Error::Capability {
            what: "random gap scan",
            cap: ENUMERATION_MAX_N,
            n,
            fallback: "threshold_probe with Monte Carlo expectations",
        });
    }
    let reports: Vec<GapReport> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let a = scan_member(n, c0, seed, t).generate()?;
            gap_with(&a, &GapOptions::best_for(&a))
        })
        .collect::<Result<_>>()?;
    let argmin = reports
        .iter()
        .enumerate()
        .min_by(|(_, x), (_, y)| x.gap.total_cmp(&y.gap))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let gaps: Vec<f64> = reports.iter().map(|r| r.gap).collect();
    let rows = reports
        .iter()
        .enumerate()
        .map(|(trial, r)| ScanRow {
            trial,
            gap: r.gap,
            ratio: r.weights.ratio(),
        })
        .collect();
    let candidates = reports
        .iter()
        .filter(|r| r.gap < -tol)
        .map(|r| recheck_candidate(&r.weights, tol))
        .collect::<Result<_>>()?;
    Ok(ScanResult {
        n,
        c0,
        trials,
        seed,
        tol,
        argmin_trial: argmin,
        min: reports[argmin].clone(),
        histogram: GapHistogram::from_gaps(&gaps),
        candidates,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizeResult {
    pub initial: GapReport,
    pub best: GapReport,
    pub evaluations: usize,
    pub converged: bool,
    pub budget_exhausted: bool,
    /// Best gap dropped below `−1e-9`.
    pub found_negative: bool,
}

/// Squared weights → feasible unit vector: clamp positive, then raise the
/// small entries so that `max/min <= c0²`.
fn project(y: &[f64], c0: f64) -> Result<WeightVector> {
    let floor = 1e-12;
    let mut p: Vec<f64> = y.iter().map(|&v| v.max(floor)).collect();
    let top = p.iter().copied().fold(0.0, f64::max);
    let lower = top / (c0 * c0);
    p.iter_mut().for_each(|v| *v = v.max(lower));
    let raw: Vec<f64> = p.iter().map(|v| v.sqrt()).collect();
    WeightVector::make_unit(&raw)
}

struct Tracker {
    c0: f64,
    evaluations: usize,
    best: GapReport,
}

impl Tracker {
    fn eval(&mut self, y: &[f64]) -> Result<f64> {
        let a = project(y, self.c0)?;
        let r = gap_with(&a, &GapOptions::best_for(&a))?;
        self.evaluations += 1;
        let g = r.gap;
        if g < self.best.gap {
            self.best = r;
        }
        Ok(g)
    }
}

/// Nelder-Mead on squared-weight coordinates, projected onto the ratio
/// constraint at every evaluation. Returns the best point seen; no claim of
/// global optimality.
pub fn minimize_gap(n: usize, c0: f64, start: &WeightVector, budget: usize) -> Result<MinimizeResult> {
    if start.len() != n {
        return Err(Error::Validation(format!("start has {} weights, expected {n}", start.len())));
    }
    if !(c0 >= 1.0) || start.ratio() > c0 * (1.0 + 1e-12) {
        return Err(Error::Validation(format!(
            "start ratio {} violates the cap c0 = {c0}",
            start.ratio()
        )));
    }
    let initial = gap_with(start, &GapOptions::best_for(start))?;
    if n == 1 || budget <= 1 {
        return Ok(MinimizeResult {
            best: initial.clone(),
            found_negative: initial.gap < -1e-9,
            initial,
            evaluations: 1,
            converged: n == 1,
            budget_exhausted: n != 1,
        });
    }
    let mut tracker = Tracker {
        c0,
        evaluations: 1,
        best: initial.clone(),
    };

    let x0: Vec<f64> = start.as_slice().iter().map(|a| a * a).collect();
    let step = 0.1 / n as f64;
    let mut simplex: Vec<Vec<f64>> = vec![x0.clone()];
    for i in 0..n {
        let mut v = x0.clone();
        v[i] += if v[i] + step <= 1.0 { step } else { -step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| tracker.eval(v)).collect::<Result<_>>()?;
    let mut converged = false;
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    while tracker.evaluations < budget {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread.abs() < 1e-13 && diameter < 1e-9 {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect()
        };
        let reflected = along(alpha);
        let fr = tracker.eval(&reflected)?;
        if fr < values[0] {
            let expanded = along(gamma);
            let fe = tracker.eval(&expanded)?;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let contracted = if fr < values[n] { along(rho) } else { along(-rho) };
            let fc = tracker.eval(&contracted)?;
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    let shrunk: Vec<f64> = simplex[i]
                        .iter()
                        .zip(&simplex[0])
                        .map(|(v, b)| b + sigma * (v - b))
                        .collect();
                    values[i] = tracker.eval(&shrunk)?;
                    simplex[i] = shrunk;
                }
            }
        }
    }
    Ok(MinimizeResult {
        found_negative: tracker.best.gap < -1e-9,
        initial,
        best: tracker.best,
        evaluations: tracker.evaluations,
        converged,
        budget_exhausted: !converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Equal,
    Geometric,
    Random,
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(FamilyKind::Equal),
            "geometric" => Ok(FamilyKind::Geometric),
            "random" => Ok(FamilyKind::Random),
            _ => Err(Error::Validation(format!("unknown family '{s}'"))),
        }
    }
}

/// Per-dimension outcome of the probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub n: usize,
    pub min_gap: f64,
    pub min_gap_weights: WeightVector,
    /// `min over tested A of max_x B(x|A) − 1/F(a_n^{−2})`.
    pub min_slack: f64,
    pub min_slack_weights: WeightVector,
    pub max_b_at_min_slack: f64,
    pub f_of_an_at_min_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub c0: f64,
    pub family: FamilyKind,
    pub n_range: (usize, usize),
    pub trials_per_n: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub rows: Vec<ProbeRow>,
    /// Least n from which the proof-route slack is >= −tolerance for every
    /// tested vector at that and every larger n in range.
    pub empirical_n0: Option<usize>,
    /// Same criterion applied to the gap itself.
    pub gap_n0: Option<usize>,
}

fn probe_vectors(kind: FamilyKind, n: usize, c0: f64, trials: usize, seed: u64) -> Result<Vec<WeightVector>> {
    match kind {
        FamilyKind::Equal => Ok(vec![WeightVector::equal(n)?]),
        FamilyKind::Geometric => {
            let q = if n > 1 { c0.powf(1.0 / (n as f64 - 1.0)) } else { 1.0 };
            Ok(vec![FamilySpec::Geometric { n, q }.generate()?])
        }
        FamilyKind::Random => (0..trials)
            .map(|t| scan_member(n, c0, mix_seed(seed, n as u64), t).generate())
            .collect(),
    }
}

pub fn threshold_probe(
    c0: f64,
    family: FamilyKind,
    n_range: (usize, usize),
    trials_per_n: usize,
    seed: u64,
) -> Result<ThresholdReport> {
    let (lo, hi) = n_range;
    if !(c0 >= 1.0) {
        return Err(Error::Validation(format!("c0 must be >= 1 (got {c0})")));
    }
    if lo == 0 || lo > hi {
        return Err(Error::Validation(format!("empty or invalid n range {lo}..{hi}")));
    }
    let tolerance = DEFAULT_GAP_TOL;
    let rows: Vec<ProbeRow> = (lo..=hi)
        .into_par_iter()
        .map(|n| -> Result<ProbeRow> {
            let vectors = probe_vectors(family, n, c0, trials_per_n.max(1), seed)?;
            let mut gap_best: Option<(f64, WeightVector)> = None;
            let mut slack_best: Option<(f64, WeightVector, f64, f64)> = None;
            for a in vectors {
                let mut opts = GapOptions::best_for(&a);
                opts.seed = mix_seed(seed, n as u64);
                let r = gap_with(&a, &opts)?;
                let top = max_value(&a, opts.phi_method)?;
                let slack = top - 1.0 / r.f_of_an;
                if gap_best.as_ref().is_none_or(|(g, _)| r.gap < *g) {
                    gap_best = Some((r.gap, a.clone()));
                }
                if slack_best.as_ref().is_none_or(|(s, ..)| slack < *s) {
                    slack_best = Some((slack, a, top, r.f_of_an));
                }
            }
            let (min_gap, min_gap_weights) = gap_best.expect("at least one vector");
            let (min_slack, min_slack_weights, top, f) = slack_best.expect("at least one vector");
            Ok(ProbeRow {
                n,
                min_gap,
                min_gap_weights,
                min_slack,
                min_slack_weights,
                max_b_at_min_slack: top,
                f_of_an_at_min_slack: f,
            })
        })
        .collect::<Result<_>>()?;
    let tail_start = |ok: &dyn Fn(&ProbeRow) -> bool| -> Option<usize> {
        let mut start = None;
        for r in rows.iter().rev() {
            if ok(r) {
                start = Some(r.n);
            } else {
                break;
            }
        }
        start
    };
    let empirical_n0 = tail_start(&|r| r.min_slack >= -tolerance);
    let gap_n0 = tail_start(&|r| r.min_gap >= -tolerance);
    Ok(ThresholdReport {
        c0,
        family,
        n_range,
        trials_per_n,
        seed,
        tolerance,
        rows,
        empirical_n0,
        gap_n0,
    })
}

/// Upper end of the admissible `ε₀`: `(√(6/π) − √(π/2)) / 2`.
pub fn epsilon0_cap() -> f64 {
    (GAUSSIAN_PEAK - (std::f64::consts::PI / 2.0).sqrt()) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn exact_gap(a: &WeightVector) -> f64 {
        gap(a, Method::TruncatedPower, ExpectationMethod::Exact).unwrap().gap
    }

    #[test]
    fn gap_examples() {
        assert_abs_diff_eq!(exact_gap(&WeightVector::equal(1).unwrap()), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(exact_gap(&WeightVector::make_unit(&[0.6, 0.8]).unwrap()), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(exact_gap(&WeightVector::equal(3).unwrap()), 0.125, epsilon = 1e-12);
    }

    #[test]
    fn verify_examples() {
        let v = verify(&WeightVector::equal(4).unwrap(), 1e-9).unwrap();
        assert!(v.holds && v.conclusive);
        assert!(v.report.gap.abs() < 1e-12);

        let v = verify(&WeightVector::equal(5).unwrap(), 1e-9).unwrap();
        assert!(v.holds);
        assert_abs_diff_eq!(v.report.gap, 115.0 * 1.875 / 192.0 - 1.0, epsilon = 1e-12);

        let v = verify(&WeightVector::make_unit(&[0.17, 0.9]).unwrap(), 1e-9).unwrap();
        assert!(v.holds && v.report.gap.abs() <= 1e-10);
    }

    #[test]
    fn approximations_cannot_verify() {
        let a = WeightVector::equal(3).unwrap();
        assert!(gap(&a, Method::Saddle, ExpectationMethod::Exact).is_err());
    }

    #[test]
    fn lower_bound_never_beats_true_gap() {
        for raw in [vec![1.0], vec![0.6, 0.8], vec![0.3, 0.4, 0.5, 0.6, 0.9]] {
            let r = gap(&WeightVector::make_unit(&raw).unwrap(), Method::TruncatedPower, ExpectationMethod::Exact).unwrap();
            assert!(r.lower_bound_gap <= r.gap + r.tolerance + r.lower_bound_tolerance);
        }
    }

    #[test]
    fn scan_n2_is_flat_and_deterministic() {
        let s = scan_random(2, 3.0, 200, 42).unwrap();
        assert!(s.min.gap.abs() <= 1e-10);
        assert!(s.histogram.max.abs() <= 1e-10);
        let t = scan_random(2, 3.0, 200, 42).unwrap();
        assert_eq!(s, t);
        assert!(s.candidates.is_empty());
    }

    #[test]
    fn minimize_descends() {
        let start = WeightVector::make_unit(&[1.0, 2.0, 2.0]).unwrap();
        let r = minimize_gap(3, 4.0, &start, 150).unwrap();
        assert!(r.best.gap <= r.initial.gap);
        assert!(r.best.weights.ratio() <= 4.0 * (1.0 + 1e-9));
        assert!(!r.found_negative);
    }

    #[test]
    fn minimize_n2_flat() {
        let start = WeightVector::make_unit(&[0.6, 0.8]).unwrap();
        let r = minimize_gap(2, 2.0, &start, 60).unwrap();
        assert!(r.best.gap.abs() < 1e-10);
    }

    #[test]
    fn minimize_rejects_infeasible_start() {
        let start = WeightVector::make_unit(&[0.1, 0.9]).unwrap();
        assert!(minimize_gap(2, 2.0, &start, 10).is_err());
        assert!(minimize_gap(3, 20.0, &start, 10).is_err());
    }

    #[test]
    fn epsilon_cap() {
        let e = epsilon0_cap();
        assert_abs_diff_eq!(e, 0.064_331_3, epsilon = 1e-7);
        assert!(e > 0.0);
        let lhs = GAUSSIAN_PEAK - e;
        let rhs = (std::f64::consts::PI / 2.0).sqrt() + e;
        assert!((lhs - rhs).abs() < 1e-15);
    }

    #[test]
    fn probe_small_equal_range() {
        let r = threshold_probe(1.0, FamilyKind::Equal, (1, 8), 1, 0).unwrap();
        assert_eq!(r.rows.len(), 8);
        assert!(r.rows.iter().all(|row| row.min_gap >= -1e-9));
        // F(1) = 2/π makes the n = 1 slack negative
        assert!(r.rows[0].min_slack < 0.0);
    }

    #[test]
    fn probe_rejects_bad_input() {
        assert!(threshold_probe(0.5, FamilyKind::Random, (2, 4), 3, 0).is_err());
        assert!(threshold_probe(2.0, FamilyKind::Random, (5, 4), 3, 0).is_err());
    }
}
