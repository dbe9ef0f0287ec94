//! Command-line front end. Every subcommand writes one JSON (or CSV)
//! document; exit code 0 means success, 1 a verified violation of the gap
//! inequality, 2 an error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::boxspline::{method_tolerance, phi, profile_on_grid, Method};
use crate::error::{Error, Result};
use crate::mahler_gap::{
    minimize_gap, recheck_candidate, scan_random_with_tol, threshold_probe, verify_with, CandidateCheck,
    FamilyKind, GapOptions, Verification, DEFAULT_GAP_TOL, DEFAULT_MC_SAMPLES,
};
use crate::rademacher::{expectation, f_function, khinchine_bounds, ExpectationMethod, FValue};
use crate::report::{fmt_f64, to_json_string};
use crate::saddlepoint::{convergence_report, write_convergence_csv, GridSpec};
use crate::weights::{FamilySpec, WeightVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "boxgap", version, about = "Box splines, cube sections and the Rademacher gap functional")]
pub struct Cli {
    /// Worker threads for parallel work (results do not depend on it).
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Exactly one weight source.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct WeightArgs {
    /// Explicit weights, normalized to unit length.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// `n` equal weights.
    #[arg(long)]
    pub equal: Option<usize>,
    /// Geometric family `n,q`.
    #[arg(long, value_parser = parse_geometric)]
    pub geometric: Option<FamilySpec>,
    /// Random family `n,c0,seed`.
    #[arg(long, value_parser = parse_random)]
    pub random: Option<FamilySpec>,
}

impl WeightArgs {
    pub fn resolve(&self) -> Result<WeightVector> {
        if let Some(w) = &self.weights {
            return WeightVector::make_unit(w);
        }
        if let Some(n) = self.equal {
            return FamilySpec::Equal { n }.generate();
        }
        if let Some(spec) = self.geometric.as_ref().or(self.random.as_ref()) {
            return spec.generate();
        }
        Err(Error::Validation("no weights given".into()))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the box spline B(x|A).
    Eval {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long)]
        method: Option<Method>,
        /// Uniform grid `start:stop:step`.
        #[arg(long, conflicts_with = "at")]
        grid: Option<String>,
        /// Points, comma separated; `center` means Σa/2.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Option<Vec<String>>,
    },
    /// Central section function φ_A(r).
    Phi {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long)]
        method: Option<Method>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        r: Vec<f64>,
    },
    /// E|Σ a_k ε_k| and its Khinchine-type lower bounds.
    Expect {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long)]
        method: Option<ExpectationMethod>,
        #[arg(long, default_value_t = DEFAULT_MC_SAMPLES)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Quadrature tolerance for the bounds.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// The lower-bound function F(s).
    Fbound {
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Gap φ_A(0)·E|Σ a_k ε_k| − 1 with verification.
    Gap {
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        exp_method: Option<ExpectationMethod>,
        #[arg(long, default_value_t = DEFAULT_MC_SAMPLES)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_GAP_TOL)]
        tol: f64,
    },
    /// Gap over random weight vectors with ratio at most c0.
    Scan {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c0: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_GAP_TOL)]
        tol: f64,
    },
    /// Local minimization of the gap under the ratio cap.
    Minimize {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c0: f64,
        /// Starting weights; equal weights when omitted.
        #[arg(long, value_delimiter = ',')]
        start: Option<Vec<f64>>,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_GAP_TOL)]
        tol: f64,
    },
    /// Gap and proof-route slack per dimension along a family.
    Probe {
        #[arg(long)]
        c0: f64,
        #[arg(long)]
        family: FamilyKind,
        /// Dimension range `lo..hi` (inclusive) or a single `n`.
        #[arg(long, value_parser = parse_range)]
        n: (usize, usize),
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Distance between B(·|A) and the Gaussian limit for growing n.
    Converge {
        #[arg(long)]
        family: FamilyKind,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Ratio for the geometric family.
        #[arg(long, default_value_t = 1.1)]
        q: f64,
        /// Ratio cap for the random family.
        #[arg(long, default_value_t = 2.0)]
        c0: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 601)]
        points: usize,
        #[arg(long, default_value_t = 3.0)]
        sigmas: f64,
    },
}

fn split_fields(s: &str, expected: usize, what: &str) -> std::result::Result<Vec<String>, String> {
    let parts: Vec<String> = s.split(',').map(|p| p.trim().to_string()).collect();
    if parts.len() != expected {
        return Err(format!("{what} expects {expected} comma-separated values, got '{s}'"));
    }
    Ok(parts)
}

fn parse_num<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse '{s}'"))
}

fn parse_geometric(s: &str) -> std::result::Result<FamilySpec, String> {
    let p = split_fields(s, 2, "--geometric")?;
    Ok(FamilySpec::Geometric {
        n: parse_num(&p[0])?,
        q: parse_num(&p[1])?,
    })
}

fn parse_random(s: &str) -> std::result::Result<FamilySpec, String> {
    let p = split_fields(s, 3, "--random")?;
    Ok(FamilySpec::Random {
        n: parse_num(&p[0])?,
        c0: parse_num(&p[1])?,
        seed: parse_num(&p[2])?,
    })
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    match s.split_once("..") {
        Some((lo, hi)) => Ok((parse_num(lo)?, parse_num(hi.trim_start_matches('='))?)),
        None => {
            let n = parse_num(s)?;
            Ok((n, n))
        }
    }
}

/// Nodes of `start:stop:step`, stop included when it lies on the grid.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Validation(format!("grid must be start:stop:step with step > 0 (got '{s}')"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    if count > 50_000_000 {
        return Err(Error::Validation(format!("grid '{s}' has too many points")));
    }
    Ok((0..=count).map(|k| start + k as f64 * step).collect())
}

fn parse_points(items: &[String], a: &WeightVector) -> Result<Vec<f64>> {
    items
        .iter()
        .map(|t| match t.trim() {
            "center" => Ok(a.center()),
            v => v
                .parse::<f64>()
                .map_err(|_| Error::Validation(format!("cannot parse point '{v}'"))),
        })
        .collect()
}

#[derive(Serialize)]
struct PhiOutput {
    #[serde(rename = "A")]
    weights: WeightVector,
    method: Method,
    r: Vec<f64>,
    values: Vec<f64>,
    tolerance: f64,
}

#[derive(Serialize)]
struct ExpectOutput {
    #[serde(flatten)]
    summary: crate::rademacher::RademacherSummary,
    bounds: crate::rademacher::KhinchineBound,
}

#[derive(Serialize)]
struct GapOutput {
    #[serde(flatten)]
    verification: Verification,
    #[serde(skip_serializing_if = "Option::is_none")]
    recheck: Option<CandidateCheck>,
}

#[derive(Serialize)]
struct MinimizeOutput {
    #[serde(flatten)]
    result: crate::mahler_gap::MinimizeResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    recheck: Option<CandidateCheck>,
}

/// A finished document plus the exit code it implies.
struct Outcome {
    body: Vec<u8>,
    code: i32,
}

impl Outcome {
    fn json<T: Serialize>(value: &T, code: i32) -> Result<Self> {
        Ok(Self {
            body: to_json_string(value)?.into_bytes(),
            code,
        })
    }
}

fn csv_table(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let csv = cli.format == Format::Csv;
    match &cli.command {
        Command::Eval {
            weights,
            method,
            grid,
            at,
        } => {
            let a = weights.resolve()?;
            let method = method.unwrap_or_else(|| Method::exact_for(a.len()));
            let xs = match (grid, at) {
                (Some(g), _) => parse_grid(g)?,
                (None, Some(points)) => parse_points(points, &a)?,
                (None, None) => {
                    let total = a.total();
                    (0..=200).map(|k| total * k as f64 / 200.0).collect()
                }
            };
            let profile = profile_on_grid(&a, xs, method)?;
            eprintln!("method {method}, tolerance {}", fmt_f64(profile.tolerance));
            if csv {
                let mut body = Vec::new();
                profile.write_csv(&mut body)?;
                Ok(Outcome { body, code: EXIT_OK })
            } else {
                Ok(Outcome {
                    body: profile.to_json()?.into_bytes(),
                    code: EXIT_OK,
                })
            }
        }
        Command::Phi { weights, method, r } => {
            let a = weights.resolve()?;
            let method = method.unwrap_or_else(|| Method::exact_for(a.len()));
            let values = r.iter().map(|&x| phi(&a, x, method)).collect::<Result<Vec<_>>>()?;
            if csv {
                let body = csv_table(
                    &["r", "value"],
                    r.iter().zip(&values).map(|(x, v)| vec![fmt_f64(*x), fmt_f64(*v)]),
                )?;
                return Ok(Outcome { body, code: EXIT_OK });
            }
            let tolerance = method_tolerance(&a, method);
            Outcome::json(
                &PhiOutput {
                    weights: a,
                    method,
                    r: r.clone(),
                    values,
                    tolerance,
                },
                EXIT_OK,
            )
        }
        Command::Expect {
            weights,
            method,
            samples,
            seed,
            tol,
        } => {
            let a = weights.resolve()?;
            let method = method.unwrap_or(GapOptions::best_for(&a).exp_method);
            let summary = expectation(&a, method, *samples, *seed)?;
            let bounds = khinchine_bounds(&a, *tol)?;
            if csv {
                let body = csv_table(
                    &["n", "method", "expectation", "f_of_an", "weighted_sum"],
                    std::iter::once(vec![
                        summary.n.to_string(),
                        summary.method.to_string(),
                        fmt_f64(summary.expectation),
                        fmt_f64(bounds.f_of_an),
                        fmt_f64(bounds.weighted_sum),
                    ]),
                )?;
                return Ok(Outcome { body, code: EXIT_OK });
            }
            Outcome::json(&ExpectOutput { summary, bounds }, EXIT_OK)
        }
        Command::Fbound { s, tol } => {
            let values = s.iter().map(|&s| f_function(s, *tol)).collect::<Result<Vec<FValue>>>()?;
            if csv {
                let body = csv_table(
                    &["s", "value", "quad_error"],
                    values
                        .iter()
                        .map(|f| vec![fmt_f64(f.s), fmt_f64(f.value), fmt_f64(f.quad_error)]),
                )?;
                return Ok(Outcome { body, code: EXIT_OK });
            }
            Outcome::json(&values, EXIT_OK)
        }
        Command::Gap {
            weights,
            method,
            exp_method,
            samples,
            seed,
            tol,
        } => {
            let a = weights.resolve()?;
            let mut opts = GapOptions::best_for(&a);
            if let Some(m) = method {
                opts.phi_method = *m;
            }
            if let Some(m) = exp_method {
                opts.exp_method = *m;
            }
            opts.mc_samples = *samples;
            opts.seed = *seed;
            let verification = verify_with(&a, *tol, &opts)?;
            let recheck = if verification.holds {
                None
            } else {
                Some(recheck_candidate(&a, *tol)?)
            };
            let code = if recheck.as_ref().is_some_and(|c| c.confirmed) {
                EXIT_VIOLATION
            } else {
                EXIT_OK
            };
            if !verification.conclusive {
                eprintln!(
                    "warning: error budget {} exceeds tolerance {}",
                    fmt_f64(verification.report.tolerance),
                    fmt_f64(*tol)
                );
            }
            if csv {
                let r = &verification.report;
                let body = csv_table(
                    &["n", "phi0", "expectation", "gap", "lower_bound_gap", "tolerance"],
                    std::iter::once(vec![
                        r.weights.len().to_string(),
                        fmt_f64(r.phi0),
                        fmt_f64(r.expectation),
                        fmt_f64(r.gap),
                        fmt_f64(r.lower_bound_gap),
                        fmt_f64(r.tolerance),
                    ]),
                )?;
                return Ok(Outcome { body, code });
            }
            Outcome::json(&GapOutput { verification, recheck }, code)
        }
        Command::Scan {
            n,
            c0,
            trials,
            seed,
            tol,
        } => {
            let result = scan_random_with_tol(*n, *c0, *trials, *seed, *tol)?;
            let code = if result.has_confirmed_violation() {
                EXIT_VIOLATION
            } else {
                EXIT_OK
            };
            if csv {
                let mut body = Vec::new();
                result.write_csv(&mut body)?;
                return Ok(Outcome { body, code });
            }
            Outcome::json(&result, code)
        }
        Command::Minimize {
            n,
            c0,
            start,
            budget,
            tol,
        } => {
            let start = match start {
                Some(w) => WeightVector::make_unit(w)?,
                None => WeightVector::equal(*n)?,
            };
            let result = minimize_gap(*n, *c0, &start, *budget)?;
            let recheck = if result.best.gap < -tol {
                Some(recheck_candidate(&result.best.weights, *tol)?)
            } else {
                None
            };
            let code = if recheck.as_ref().is_some_and(|c| c.confirmed) {
                EXIT_VIOLATION
            } else {
                EXIT_OK
            };
            if csv {
                let b = &result.best;
                let body = csv_table(
                    &["evaluations", "initial_gap", "best_gap", "ratio", "converged"],
                    std::iter::once(vec![
                        result.evaluations.to_string(),
                        fmt_f64(result.initial.gap),
                        fmt_f64(b.gap),
                        fmt_f64(b.weights.ratio()),
                        result.converged.to_string(),
                    ]),
                )?;
                return Ok(Outcome { body, code });
            }
            Outcome::json(&MinimizeOutput { result, recheck }, code)
        }
        Command::Probe {
            c0,
            family,
            n,
            trials,
            seed,
        } => {
            let report = threshold_probe(*c0, *family, *n, *trials, *seed)?;
            if csv {
                let body = csv_table(
                    &["n", "min_gap", "min_slack", "max_b", "f_of_an"],
                    report.rows.iter().map(|r| {
                        vec![
                            r.n.to_string(),
                            fmt_f64(r.min_gap),
                            fmt_f64(r.min_slack),
                            fmt_f64(r.max_b_at_min_slack),
                            fmt_f64(r.f_of_an_at_min_slack),
                        ]
                    }),
                )?;
                return Ok(Outcome { body, code: EXIT_OK });
            }
            Outcome::json(&report, EXIT_OK)
        }
        Command::Converge {
            family,
            n,
            q,
            c0,
            seed,
            points,
            sigmas,
        } => {
            let specs: Vec<FamilySpec> = n
                .iter()
                .map(|&n| match family {
                    FamilyKind::Equal => FamilySpec::Equal { n },
                    FamilyKind::Geometric => FamilySpec::Geometric { n, q: *q },
                    FamilyKind::Random => FamilySpec::Random {
                        n,
                        c0: *c0,
                        seed: crate::weights::mix_seed(*seed, n as u64),
                    },
                })
                .collect();
            let grid = GridSpec {
                half_width_sigmas: *sigmas,
                points: *points,
            };
            let reports = convergence_report(&specs, grid)?;
            if csv {
                let mut body = Vec::new();
                write_convergence_csv(&reports, &mut body)?;
                return Ok(Outcome { body, code: EXIT_OK });
            }
            Outcome::json(&reports, EXIT_OK)
        }
    }
}

fn emit(cli: &Cli, body: &[u8]) -> Result<()> {
    match &cli.out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            f.write_all(body)?;
            f.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(body)?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.max(1)).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    match pool.install(|| execute(&cli)).and_then(|o| emit(&cli, &o.body).map(|_| o.code)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
