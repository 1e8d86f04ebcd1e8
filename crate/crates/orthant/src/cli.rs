//! Command implementations and file formats behind the `orthant` binary.
//!
//! Problems are read from a JSON document with keys `mean` (d reals),
//! `cov` (d rows of d reals) and optional `signs` (entries +-1). Results
//! are emitted as JSON on stdout with all floating point numbers printed
//! at 17 significant digits.

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::Error;
use crate::integrator::{IntegratorConfig, Method};
use crate::linalg::Matrix;
use crate::model::{natural_params, ProblemSpec, SubsetIndex, HARD_DIM_CAP};
use crate::oracles;
use crate::probability::{
    orthant_probability, orthant_probability_signed, orthant_sum_check_detail, OrthantResult,
};

/// Exit codes of the binary.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const PARSE_OR_VALIDATION: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const ORACLE_MISMATCH: i32 = 4;
    pub const ORACLE_INAPPLICABLE: i32 = 5;
}

/// A command failure: exit code plus a machine-readable error object.
#[derive(Debug)]
pub struct CliFailure {
    pub code: i32,
    pub payload: String,
}

impl CliFailure {
    fn new(code: i32, kind: &str, message: &str) -> Self {
        CliFailure {
            code,
            payload: format!(
                "{{\"error\": {{\"kind\": {}, \"message\": {}}}}}",
                serde_json::to_string(kind).unwrap(),
                serde_json::to_string(message).unwrap()
            ),
        }
    }
}

impl From<Error> for CliFailure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NotSymmetric { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::DimensionTooLarge { .. }
            | Error::InvalidConfig { .. }
            | Error::SumCheckTooLarge { .. } => exit_code::PARSE_OR_VALIDATION,
            Error::MaxStepsExceeded { .. }
            | Error::StepUnderflow { .. }
            | Error::NonFiniteState { .. }
            | Error::SingularSubmatrix { .. }
            | Error::NonNegativeDiagonal { .. } => exit_code::NUMERICAL,
            Error::OracleInapplicable { .. }
            | Error::InvalidRho { .. }
            | Error::InvalidVariance { .. }
            | Error::TooHighDimension { .. } => exit_code::ORACLE_INAPPLICABLE,
        };
        let kind = match &e {
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::InvalidConfig { .. } => "InvalidConfig",
            Error::SumCheckTooLarge { .. } => "SumCheckTooLarge",
            Error::MaxStepsExceeded { .. } => "MaxStepsExceeded",
            Error::StepUnderflow { .. } => "StepUnderflow",
            Error::NonFiniteState { .. } => "NonFiniteState",
            Error::SingularSubmatrix { .. } => "SingularSubmatrix",
            Error::NonNegativeDiagonal { .. } => "NonNegativeDiagonal",
            Error::OracleInapplicable { .. } => "OracleInapplicable",
            Error::InvalidRho { .. } => "InvalidRho",
            Error::InvalidVariance { .. } => "InvalidVariance",
            Error::TooHighDimension { .. } => "TooHighDimension",
        };
        CliFailure::new(code, kind, &e.to_string())
    }
}

fn parse_failure(message: String) -> CliFailure {
    CliFailure::new(exit_code::PARSE_OR_VALIDATION, "ParseError", &message)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
    signs: Option<Vec<i8>>,
}

/// Parses and validates a problem document.
pub fn load_problem(text: &str) -> Result<(ProblemSpec, Option<Vec<i8>>), CliFailure> {
    let file: ProblemFile =
        serde_json::from_str(text).map_err(|e| parse_failure(format!("invalid JSON: {e}")))?;
    let d = file.mean.len();
    if file.cov.len() != d {
        return Err(parse_failure(format!(
            "cov has {} rows but mean has {} entries",
            file.cov.len(),
            d
        )));
    }
    for (r, row) in file.cov.iter().enumerate() {
        if row.len() != d {
            return Err(parse_failure(format!(
                "cov row {} has {} columns, expected {}",
                r,
                row.len(),
                d
            )));
        }
    }
    if let Some(signs) = &file.signs {
        if signs.len() != d {
            return Err(parse_failure(format!(
                "signs has {} entries, expected {}",
                signs.len(),
                d
            )));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(parse_failure("signs entries must be +1 or -1".into()));
        }
    }
    let cov = Matrix::from_rows(&file.cov);
    let spec = ProblemSpec::with_cap(file.mean, cov, HARD_DIM_CAP).map_err(CliFailure::from)?;
    Ok((spec, file.signs))
}

/// Integrator flags shared by the subcommands.
#[derive(Debug, Clone)]
pub struct RunFlags {
    pub rtol: f64,
    pub atol: f64,
    pub method: Method,
    pub max_steps: u64,
}

impl Default for RunFlags {
    fn default() -> Self {
        let c = IntegratorConfig::default();
        RunFlags {
            rtol: c.rtol,
            atol: c.atol,
            method: c.method,
            max_steps: c.max_steps,
        }
    }
}

impl RunFlags {
    pub fn to_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            method: self.method,
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
            ..Default::default()
        }
    }
}

/// 17-significant-digit decimal form, round-trip safe for f64.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Rk4Fixed => "rk4",
        Method::Rkf45Adaptive => "rkf45",
    }
}

fn config_json(flags: &RunFlags, seed: Option<u64>) -> String {
    let mut s = format!(
        "{{\"rtol\": {}, \"atol\": {}, \"method\": \"{}\", \"max_steps\": {}",
        fmt_f64(flags.rtol),
        fmt_f64(flags.atol),
        method_name(flags.method),
        flags.max_steps
    );
    if let Some(seed) = seed {
        let _ = write!(s, ", \"seed\": {seed}");
    }
    s.push('}');
    s
}

fn result_document(
    r: &OrthantResult,
    elapsed_seconds: f64,
    flags: &RunFlags,
    seed: Option<u64>,
) -> String {
    format!(
        "{{\n  \"probability\": {},\n  \"g_value\": {},\n  \"log_prefactor\": {},\n  \"steps\": {},\n  \"rejected_steps\": {},\n  \"residual_norm\": {},\n  \"elapsed_seconds\": {},\n  \"config\": {}\n}}",
        fmt_f64(r.probability),
        fmt_f64(r.g_value),
        fmt_f64(r.log_prefactor),
        r.steps,
        r.rejected_steps,
        fmt_f64(r.residual_norm),
        fmt_f64(elapsed_seconds),
        config_json(flags, seed)
    )
}

/// `compute`: orthant probability of the problem file (honoring optional
/// signs), emitted as a result document.
pub fn cmd_compute(problem_text: &str, flags: &RunFlags) -> Result<String, CliFailure> {
    let (spec, signs) = load_problem(problem_text)?;
    let config = flags.to_config();
    let start = Instant::now();
    let result = match signs {
        Some(signs) => orthant_probability_signed(&spec, &signs, &config)?,
        None => orthant_probability(&spec, &config)?,
    };
    Ok(result_document(
        &result,
        start.elapsed().as_secs_f64(),
        flags,
        None,
    ))
}

/// `sum-check`: all 2^d signed orthant probabilities and the deviation of
/// their sum from one.
pub fn cmd_sum_check(problem_text: &str, flags: &RunFlags) -> Result<String, CliFailure> {
    let (spec, _) = load_problem(problem_text)?;
    let config = flags.to_config();
    let (err, table) = orthant_sum_check_detail(&spec, &config)?;
    let mut out = String::from("{\n  \"orthants\": [\n");
    for (k, (signs, p)) in table.iter().enumerate() {
        let signs_str: Vec<String> = signs.iter().map(|s| s.to_string()).collect();
        let _ = write!(
            out,
            "    {{\"signs\": [{}], \"probability\": {}}}{}\n",
            signs_str.join(", "),
            fmt_f64(*p),
            if k + 1 < table.len() { "," } else { "" }
        );
    }
    let _ = write!(
        out,
        "  ],\n  \"sum_error\": {},\n  \"config\": {}\n}}",
        fmt_f64(err),
        config_json(flags, None)
    );
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Mc,
    Equicorr,
    Bivariate,
    Univariate,
    Quadrature,
}

fn check_equicorrelated(spec: &ProblemSpec) -> Result<f64, Error> {
    let d = spec.dim();
    let tol = 1e-12;
    for i in 0..d {
        if (spec.cov().get(i, i) - 1.0).abs() > tol {
            return Err(Error::OracleInapplicable {
                reason: format!(
                    "equicorr oracle needs unit variances; cov[{i}][{i}] = {}",
                    spec.cov().get(i, i)
                ),
            });
        }
    }
    let rho = if d > 1 { spec.cov().get(0, 1) } else { 0.0 };
    for i in 0..d {
        for j in (i + 1)..d {
            if (spec.cov().get(i, j) - rho).abs() > tol {
                return Err(Error::OracleInapplicable {
                    reason: format!(
                        "covariance is not equicorrelated: cov[{i}][{j}] = {} differs from {rho}",
                        spec.cov().get(i, j)
                    ),
                });
            }
        }
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::OracleInapplicable {
            reason: format!("equicorr oracle needs rho in [0,1), got {rho}"),
        });
    }
    Ok(rho)
}

/// `compare`: HGM value against a chosen oracle; fails with
/// [`exit_code::ORACLE_MISMATCH`] when the difference exceeds the
/// tolerance (for `mc`, three standard errors if that is larger).
pub fn cmd_compare(
    problem_text: &str,
    oracle: OracleKind,
    samples: u64,
    seed: u64,
    tolerance: f64,
    flags: &RunFlags,
) -> Result<String, CliFailure> {
    let (spec, _) = load_problem(problem_text)?;
    let config = flags.to_config();
    let hgm = orthant_probability(&spec, &config)?;

    let zero_mean = spec.mean().iter().all(|m| m.abs() <= 1e-12);
    let (name, oracle_value, threshold, extra) = match oracle {
        OracleKind::Univariate => {
            if spec.dim() != 1 {
                return Err(Error::OracleInapplicable {
                    reason: format!("univariate oracle needs d = 1, got {}", spec.dim()),
                }
                .into());
            }
            let v = oracles::univariate_reference(spec.mean()[0], spec.cov().get(0, 0))?;
            ("univariate", v, tolerance, String::new())
        }
        OracleKind::Bivariate => {
            if spec.dim() != 2 || !zero_mean {
                return Err(Error::OracleInapplicable {
                    reason: "bivariate oracle needs d = 2 and zero mean".into(),
                }
                .into());
            }
            let s1 = spec.cov().get(0, 0).sqrt();
            let s2 = spec.cov().get(1, 1).sqrt();
            let rho = spec.cov().get(0, 1) / (s1 * s2);
            let v = oracles::bivariate_reference(rho)?;
            ("bivariate", v, tolerance, String::new())
        }
        OracleKind::Equicorr => {
            let rho = check_equicorrelated(&spec).map_err(CliFailure::from)?;
            let v = oracles::equicorrelated_reference(spec.dim(), rho, Some(spec.mean()))?;
            ("equicorr", v, tolerance, String::new())
        }
        OracleKind::Quadrature => {
            if spec.dim() > 3 {
                return Err(Error::OracleInapplicable {
                    reason: format!("quadrature oracle needs d <= 3, got {}", spec.dim()),
                }
                .into());
            }
            let params = natural_params(&spec)?;
            let g =
                oracles::direct_g_quadrature(&params.x, &params.y, SubsetIndex::full(spec.dim()))?;
            let v = hgm.log_prefactor.exp() * g;
            ("quadrature", v, tolerance, String::new())
        }
        OracleKind::Mc => {
            let est = oracles::mc_orthant(&spec, samples, seed)?;
            let extra = format!(
                ", \"std_error\": {}, \"samples\": {}, \"seed\": {}",
                fmt_f64(est.std_error),
                est.samples,
                est.seed
            );
            (
                "mc",
                est.estimate,
                tolerance.max(3.0 * est.std_error),
                extra,
            )
        }
    };

    let diff = (hgm.probability - oracle_value).abs();
    let doc = format!(
        "{{\"oracle\": \"{}\", \"hgm\": {}, \"oracle_value\": {}, \"abs_difference\": {}, \"tolerance\": {}{}}}",
        name,
        fmt_f64(hgm.probability),
        fmt_f64(oracle_value),
        fmt_f64(diff),
        fmt_f64(threshold),
        extra
    );
    if diff > threshold {
        Err(CliFailure {
            code: exit_code::ORACLE_MISMATCH,
            payload: doc,
        })
    } else {
        Ok(doc)
    }
}

/// One row of the dimension scaling study.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub dim: usize,
    pub trials: usize,
    pub mean_seconds: f64,
    pub min_seconds: f64,
    pub max_seconds: f64,
    /// Sum-to-one error of the first trial problem, computed only for
    /// small dimensions where 2^d integrations stay cheap.
    pub sum_check_error: Option<f64>,
}

const BENCH_SUM_CHECK_MAX_DIM: usize = 6;

/// Times `trials` random zero-mean problems per dimension. Correlation
/// matrices are seed-deterministic normalized Gram matrices.
pub fn bench_dims(
    dims: RangeInclusive<usize>,
    trials: usize,
    seed: u64,
    flags: &RunFlags,
) -> Result<Vec<BenchRow>, CliFailure> {
    assert!(trials >= 1);
    let config = flags.to_config();
    let mut rows = Vec::new();
    for dim in dims {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (dim as u64) << 32);
        let mut times = Vec::with_capacity(trials);
        let mut sum_check_error = None;
        for trial in 0..trials {
            let cov = oracles::random_correlation(dim, &mut rng);
            let spec = ProblemSpec::with_cap(vec![0.0; dim], cov, HARD_DIM_CAP)?;
            let start = Instant::now();
            orthant_probability(&spec, &config)?;
            times.push(start.elapsed().as_secs_f64());
            if trial == 0 && dim <= BENCH_SUM_CHECK_MAX_DIM {
                sum_check_error = Some(crate::probability::orthant_sum_check(&spec, &config)?);
            }
        }
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        let min = times.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = times.iter().cloned().fold(0.0, f64::max);
        rows.push(BenchRow {
            dim,
            trials,
            mean_seconds: mean,
            min_seconds: min,
            max_seconds: max,
            sum_check_error,
        });
    }
    Ok(rows)
}

/// `bench`: formats [`bench_dims`] as JSON.
pub fn cmd_bench(
    dims: RangeInclusive<usize>,
    trials: usize,
    seed: u64,
    flags: &RunFlags,
) -> Result<String, CliFailure> {
    let rows = bench_dims(dims, trials, seed, flags)?;
    let mut out = String::from("{\n  \"rows\": [\n");
    for (k, r) in rows.iter().enumerate() {
        let sc = match r.sum_check_error {
            Some(e) => fmt_f64(e),
            None => "null".into(),
        };
        let _ = write!(
            out,
            "    {{\"dim\": {}, \"trials\": {}, \"mean_seconds\": {}, \"min_seconds\": {}, \"max_seconds\": {}, \"sum_check_error\": {}}}{}\n",
            r.dim,
            r.trials,
            fmt_f64(r.mean_seconds),
            fmt_f64(r.min_seconds),
            fmt_f64(r.max_seconds),
            sc,
            if k + 1 < rows.len() { "," } else { "" }
        );
    }
    let _ = write!(out, "  ],\n  \"seed\": {seed}\n}}");
    Ok(out)
}
