//! Config-driven experiment runner behind the `sdd` binary.
//!
//! Every failure is reported with the stage it happened in and ends the
//! process with exit code 1. Configurations are fully validated before the
//! output directory is touched.

mod config;
mod pipeline;
mod table;
mod verify;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::SddError;

pub use config::{
    read_samples, BenchmarkConfig, CoordinateConfig, FittingConfig, KnotConfig, McsConfig, Method,
    OutputsConfig, RunConfig, Target, ValidatedRun,
};
pub use pipeline::{cdf_csv, run, write_cdf, RunReport};
pub use table::{table_csv, table_example1, TableRow};
pub use verify::{verify, Check};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Validation,
    Basis,
    Conditioning,
    Fitting,
    Io,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Validation => "validation",
            Stage::Basis => "basis",
            Stage::Conditioning => "conditioning",
            Stage::Fitting => "fitting",
            Stage::Io => "io",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub stage: Stage,
    pub source: SddError,
}

impl CliError {
    pub fn at(stage: Stage) -> impl FnOnce(SddError) -> CliError {
        move |source| {
            // Loss of definiteness is its own stage wherever it surfaces.
            let stage = if matches!(source, SddError::Conditioning { .. }) {
                Stage::Conditioning
            } else {
                stage
            };
            CliError { stage, source }
        }
    }

    pub fn io(e: std::io::Error) -> CliError {
        CliError {
            stage: Stage::Io,
            source: SddError::Io(e),
        }
    }

    /// One-line JSON object for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "stage": self.stage.as_str(), "error": self.source.to_string() })
            .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage.as_str(), self.source)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(name = "sdd", version, about = "Spline dimensional decomposition runner")]
pub struct Cli {
    /// Worker threads (default: available parallelism); results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one expansion from a JSON run configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides every seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the configured method.
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Relative variance errors of the polynomial and spline fits to the two-input example.
    TableExample1 {
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate B-splines or their orthonormalized versions on a grid.
    BasisDump {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, default_value_t = 4)]
        elements: usize,
        #[arg(long)]
        repeat_center: bool,
        #[arg(long, value_enum, default_value_t = BasisMeasure::Uniform)]
        measure: BasisMeasure,
        #[arg(long)]
        orthonormal: bool,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Empirical output CDF of a saved expansion by surrogate Monte Carlo.
    Cdf {
        #[arg(long)]
        expansion: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        stride: usize,
    },
    /// Run the built-in invariant checks.
    Verify,
}

/// Input laws on `[-1, 1]` for `basis-dump`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisMeasure {
    Uniform,
    /// Mean −0.5, standard deviation 0.5 before truncation.
    TruncatedGaussian,
    /// Beta(3, 2).
    Beta,
}

impl BasisMeasure {
    pub fn spec(self) -> crate::measures::MeasureSpec {
        use crate::measures::MeasureSpec;
        match self {
            BasisMeasure::Uniform => MeasureSpec::uniform(-1.0, 1.0),
            BasisMeasure::TruncatedGaussian => MeasureSpec::truncated_gaussian(-1.0, 1.0, -0.5, 0.5),
            BasisMeasure::Beta => MeasureSpec::beta(-1.0, 1.0, 3.0, 2.0),
        }
        .expect("fixed parameters are valid")
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_entry() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SDD_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            1
        }
    }
}

pub fn execute(cli: Cli) -> Result<i32, CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::at(Stage::Validation)(SddError::arg("--threads must be at least 1")));
        }
        // A second initialization only happens when embedding; the existing pool is fine then.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            method,
        } => {
            let mut cfg = RunConfig::load(&config).map_err(CliError::at(Stage::Validation))?;
            if let Some(s) = seed {
                cfg.set_seed(s);
            }
            if let Some(m) = method {
                cfg.method = m;
            }
            let report = run(cfg, &out)?;
            println!("mean      {:.10e}", report.expansion.mean());
            println!("variance  {:.10e}", report.expansion.variance().total);
            if let Some(err) = report.relative_variance_error {
                println!("relative variance error {err:.6e}");
            }
            for w in &report.expansion.diagnostics().warnings {
                println!("warning: {w}");
            }
            Ok(0)
        }
        Command::TableExample1 { out } => {
            let rows = table_example1().map_err(CliError::at(Stage::Fitting))?;
            std::fs::create_dir_all(&out).map_err(CliError::io)?;
            let csv = table_csv(&rows);
            std::fs::write(out.join("example1_table.csv"), &csv).map_err(CliError::io)?;
            print!("{csv}");
            Ok(0)
        }
        Command::BasisDump {
            out,
            degree,
            elements,
            repeat_center,
            measure,
            orthonormal,
            points,
        } => {
            let csv = pipeline::basis_dump(degree, elements, repeat_center, measure.spec(), orthonormal, points)?;
            std::fs::create_dir_all(&out).map_err(CliError::io)?;
            let name = if orthonormal { "orthonormal_basis.csv" } else { "bspline_basis.csv" };
            std::fs::write(out.join(name), csv).map_err(CliError::io)?;
            Ok(0)
        }
        Command::Cdf {
            expansion,
            out,
            count,
            seed,
            stride,
        } => {
            let text = std::fs::read_to_string(&expansion).map_err(CliError::io)?;
            let e = crate::decomposition::SddExpansion::from_json(&text)
                .map_err(CliError::at(Stage::Validation))?;
            if count < 2 || stride == 0 {
                return Err(CliError::at(Stage::Validation)(SddError::arg(
                    "cdf needs --count >= 2 and --stride >= 1",
                )));
            }
            let dist = e.sample_surrogate(count, seed);
            std::fs::create_dir_all(&out).map_err(CliError::io)?;
            write_cdf(&out.join("cdf.csv"), &dist, None, stride)?;
            Ok(0)
        }
        Command::Verify => {
            let checks = verify();
            let mut failed = 0;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            println!("{} of {} checks passed", checks.len() - failed, checks.len());
            Ok(i32::from(failed > 0))
        }
    }
}
