use std::ops::RangeInclusive;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use orthant::cli::{self, CliFailure, OracleKind, RunFlags};
use orthant::integrator::Method;

#[derive(Parser)]
#[command(
    name = "orthant",
    about = "Multivariate normal orthant probabilities via the holonomic gradient method"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Rk4,
    Rkf45,
}

#[derive(Args)]
struct IntegratorArgs {
    /// Relative tolerance of the step controller
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    /// Absolute tolerance of the step controller
    #[arg(long, default_value_t = 1e-12)]
    atol: f64,
    /// Integration scheme
    #[arg(long, value_enum, default_value_t = MethodArg::Rkf45)]
    method: MethodArg,
    /// Maximum number of (accepted + rejected) steps
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
}

impl IntegratorArgs {
    fn to_flags(&self) -> RunFlags {
        RunFlags {
            rtol: self.rtol,
            atol: self.atol,
            method: match self.method {
                MethodArg::Rk4 => Method::Rk4Fixed,
                MethodArg::Rkf45 => Method::Rkf45Adaptive,
            },
            max_steps: self.max_steps,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Mc,
    Equicorr,
    Bivariate,
    Univariate,
    Quadrature,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the orthant probability of a problem file
    Compute {
        problem_file: String,
        #[command(flatten)]
        integrator: IntegratorArgs,
    },
    /// Sum all 2^d signed orthant probabilities and report |1 - sum|
    SumCheck {
        problem_file: String,
        #[command(flatten)]
        integrator: IntegratorArgs,
    },
    /// Compare the computed probability against an independent oracle
    Compare {
        problem_file: String,
        #[arg(long, value_enum)]
        oracle: OracleArg,
        /// Monte Carlo sample count (mc oracle only)
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// RNG seed (mc oracle only)
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Maximum tolerated |hgm - oracle|
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[command(flatten)]
        integrator: IntegratorArgs,
    },
    /// Time random zero-mean problems across a range of dimensions
    Bench {
        /// Dimension range, e.g. 5..12 (inclusive)
        #[arg(long, default_value = "5..8")]
        dims: String,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        integrator: IntegratorArgs,
    },
}

fn parse_dims(text: &str) -> Result<RangeInclusive<usize>, String> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| format!("expected LO..HI, got {text:?}"))?;
    let lo: usize = lo.trim().parse().map_err(|e| format!("bad dims start: {e}"))?;
    let hi: usize = hi.trim().parse().map_err(|e| format!("bad dims end: {e}"))?;
    if lo == 0 || hi < lo {
        return Err(format!("invalid dims range {lo}..{hi}"));
    }
    Ok(lo..=hi)
}

fn read_file(path: &str) -> Result<String, CliFailure> {
    std::fs::read_to_string(path).map_err(|e| CliFailure {
        code: cli::exit_code::PARSE_OR_VALIDATION,
        payload: format!(
            "{{\"error\": {{\"kind\": \"ParseError\", \"message\": {}}}}}",
            serde_json::to_string(&format!("cannot read {path}: {e}")).unwrap()
        ),
    })
}

fn run(command: Command) -> Result<String, CliFailure> {
    match command {
        Command::Compute {
            problem_file,
            integrator,
        } => cli::cmd_compute(&read_file(&problem_file)?, &integrator.to_flags()),
        Command::SumCheck {
            problem_file,
            integrator,
        } => cli::cmd_sum_check(&read_file(&problem_file)?, &integrator.to_flags()),
        Command::Compare {
            problem_file,
            oracle,
            samples,
            seed,
            tolerance,
            integrator,
        } => {
            let kind = match oracle {
                OracleArg::Mc => OracleKind::Mc,
                OracleArg::Equicorr => OracleKind::Equicorr,
                OracleArg::Bivariate => OracleKind::Bivariate,
                OracleArg::Univariate => OracleKind::Univariate,
                OracleArg::Quadrature => OracleKind::Quadrature,
            };
            cli::cmd_compare(
                &read_file(&problem_file)?,
                kind,
                samples,
                seed,
                tolerance,
                &integrator.to_flags(),
            )
        }
        Command::Bench {
            dims,
            trials,
            seed,
            integrator,
        } => {
            let range = parse_dims(&dims).map_err(|m| CliFailure {
                code: cli::exit_code::PARSE_OR_VALIDATION,
                payload: format!(
                    "{{\"error\": {{\"kind\": \"ParseError\", \"message\": {}}}}}",
                    serde_json::to_string(&m).unwrap()
                ),
            })?;
            cli::cmd_bench(range, trials, seed, &integrator.to_flags())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(doc) => {
            println!("{doc}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            println!("{}", failure.payload);
            ExitCode::from(failure.code as u8)
        }
    }
}
