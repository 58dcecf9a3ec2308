use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use super::config::{FittingConfig, RunConfig, Target};
use super::{CliError, Stage};
use crate::bench::relative_variance_error;
use crate::bspline::eval_all;
use crate::decomposition::{
    coefficients_csv, sample_function, sample_inputs, variance_csv, EmpiricalDistribution,
    ExpansionSetup, RegressionOptions, SddExpansion, SurrogateSample,
};
use crate::decomposition::sci;
use crate::error::SddError;
use crate::knots::KnotSequence;
use crate::measures::MeasureSpec;
use crate::orthobasis::OrthonormalBasis1D;

/// Upper bound on points per element during quadrature escalation.
const MAX_ESCALATED_POINTS: usize = 256;

#[derive(Debug, Clone)]
pub struct RunReport {
    pub expansion: SddExpansion,
    pub exact_variance: Option<f64>,
    pub relative_variance_error: Option<f64>,
    /// Surrogate and exact-function samples, when an `mcs` block was given.
    pub surrogate_distribution: Option<EmpiricalDistribution>,
    pub exact_distribution: Option<EmpiricalDistribution>,
    pub written: Vec<PathBuf>,
}

/// Validates, fits and writes every requested artifact into `out`.
pub fn run(config: RunConfig, out: &Path) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let config_json = serde_json::to_string(&config).expect("configs serialize");
    let config_hash = hex_digest(config_json.as_bytes());
    let run = config.validate().map_err(CliError::at(Stage::Validation))?;

    let t = Instant::now();
    let bases = run
        .knots
        .iter()
        .zip(run.measure.components())
        .map(|(k, m)| OrthonormalBasis1D::whiten(k.clone(), m.clone()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::at(Stage::Basis))?;
    let setup = ExpansionSetup::new(bases, run.order).map_err(CliError::at(Stage::Basis))?;
    let basis_ms = t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let expansion = fit(&setup, &run.target, &run.config.fitting).map_err(CliError::at(Stage::Fitting))?;
    let fit_ms = t.elapsed().as_secs_f64() * 1e3;

    let (exact_mean, exact_variance) = match &run.target {
        Target::Benchmark(f) => (f.exact_mean(), f.exact_variance()),
        Target::Samples(_) => (None, None),
    };
    let variance = expansion.variance();
    let rel = exact_variance.and_then(|v| relative_variance_error(variance.total, v).ok());

    let t = Instant::now();
    let (surrogate, exact) = match &run.config.mcs {
        Some(m) => {
            let s = expansion.sample_surrogate(m.count, m.seed);
            let e = match &run.target {
                Target::Benchmark(f) => {
                    Some(sample_function(|x| f.eval(x), &run.measure, m.count, m.seed))
                }
                Target::Samples(_) => None,
            };
            (Some(s), e)
        }
        None => (None, None),
    };
    let mcs_ms = t.elapsed().as_secs_f64() * 1e3;

    std::fs::create_dir_all(out).map_err(CliError::io)?;
    let mut written = Vec::new();

    let opt = |v: Option<f64>| v.map(sci).unwrap_or_default();
    let ks = surrogate
        .as_ref()
        .zip(exact.as_ref())
        .map(|(s, e)| s.ks_distance(e));
    let mut stats = String::from(
        "method,N,S,coefficient_count,mean,variance,exact_mean,exact_variance,relative_variance_error,ks_distance\n",
    );
    let _ = writeln!(
        stats,
        "{},{},{},{},{},{},{},{},{},{}",
        serde_json::to_value(run.config.method).expect("method serializes").as_str().unwrap_or(""),
        setup.dim(),
        setup.order(),
        setup.coefficient_count(),
        sci(expansion.mean()),
        sci(variance.total),
        opt(exact_mean),
        opt(exact_variance),
        opt(rel),
        opt(ks),
    );
    put(out, &mut written, "statistics.csv", &stats)?;
    let outputs = &run.config.outputs;
    if outputs.expansion {
        put(out, &mut written, "expansion.json", &expansion.to_json())?;
    }
    if outputs.coefficients {
        put(out, &mut written, "coefficients.csv", &coefficients_csv(&expansion))?;
    }
    if outputs.variance_decomposition {
        put(out, &mut written, "variance_decomposition.csv", &variance_csv(&expansion))?;
    }
    if outputs.cdf {
        let s = surrogate.as_ref().expect("validated: cdf needs mcs");
        put(out, &mut written, "cdf.csv", &cdf_csv(s, exact.as_ref(), outputs.cdf_stride))?;
    }

    let mut files: Vec<String> = written
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    files.push("manifest.json".into());
    let manifest = serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": config_hash,
        "config": serde_json::from_str::<serde_json::Value>(&config_json).expect("valid json"),
        "seeds": {
            "regression": match run.config.fitting {
                FittingConfig::Regression { seed, .. } => Some(seed),
                FittingConfig::Quadrature { .. } => None,
            },
            "mcs": run.config.mcs.as_ref().map(|m| m.seed),
        },
        "fit": {
            "method": format!("{:?}", expansion.diagnostics().method),
            "condition_estimate": expansion.diagnostics().condition_estimate,
            "warnings": expansion.diagnostics().warnings,
        },
        "timings_ms": {
            "basis": basis_ms,
            "fit": fit_ms,
            "mcs": mcs_ms,
            "total": started.elapsed().as_secs_f64() * 1e3,
        },
        "outputs": files,
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    put(out, &mut written, "manifest.json", &text)?;

    Ok(RunReport {
        expansion,
        exact_variance,
        relative_variance_error: rel,
        surrogate_distribution: surrogate,
        exact_distribution: exact,
        written,
    })
}

fn fit(setup: &ExpansionSetup, target: &Target, fitting: &FittingConfig) -> crate::Result<SddExpansion> {
    match (fitting, target) {
        (FittingConfig::Quadrature { points_per_element, tolerance }, Target::Benchmark(f)) => {
            let breaks = f.breakpoints();
            let y = |x: &[f64]| f.eval(x);
            match tolerance {
                Some(tol) => setup.fit_quadrature_converged(
                    y,
                    &breaks,
                    *points_per_element,
                    *tol,
                    MAX_ESCALATED_POINTS.max(*points_per_element),
                ),
                None => setup.fit_quadrature(y, &breaks, *points_per_element),
            }
        }
        (
            FittingConfig::Regression {
                samples,
                seed,
                ridge,
                min_oversampling,
            },
            target,
        ) => {
            let options = RegressionOptions {
                ridge: *ridge,
                min_oversampling: *min_oversampling,
            };
            let data: Vec<SurrogateSample> = match target {
                Target::Benchmark(f) => {
                    let count = samples.expect("validated: benchmark regression has a count");
                    sample_inputs(setup.measure(), count, *seed)
                        .into_iter()
                        .map(|x| {
                            let y = f.eval(&x);
                            SurrogateSample { x, y }
                        })
                        .collect()
                }
                Target::Samples(rows) => rows
                    .iter()
                    .map(|(x, y)| SurrogateSample { x: x.clone(), y: *y })
                    .collect(),
            };
            setup.fit_regression(&data, options)
        }
        (FittingConfig::Quadrature { .. }, Target::Samples(_)) => Err(SddError::arg(
            "a sample file can only be fitted by regression",
        )),
    }
}

fn put(dir: &Path, written: &mut Vec<PathBuf>, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(CliError::io)?;
    written.push(path);
    Ok(())
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `y,surrogate_cdf[,exact_cdf]` at every `stride`-th surrogate order statistic.
pub fn cdf_csv(surrogate: &EmpiricalDistribution, exact: Option<&EmpiricalDistribution>, stride: usize) -> String {
    let mut out = String::from(if exact.is_some() { "y,surrogate_cdf,exact_cdf\n" } else { "y,surrogate_cdf\n" });
    for (y, f) in surrogate.cdf_points(stride) {
        match exact {
            Some(e) => {
                let _ = writeln!(out, "{},{},{}", sci(y), sci(f), sci(e.cdf(y)));
            }
            None => {
                let _ = writeln!(out, "{},{}", sci(y), sci(f));
            }
        }
    }
    out
}

pub fn write_cdf(
    path: &Path,
    surrogate: &EmpiricalDistribution,
    exact: Option<&EmpiricalDistribution>,
    stride: usize,
) -> Result<(), CliError> {
    std::fs::write(path, cdf_csv(surrogate, exact, stride)).map_err(CliError::io)
}

/// `x,B_1..B_n` or `x,psi_1..psi_n` on `points` equispaced abscissae.
pub(super) fn basis_dump(
    degree: usize,
    elements: usize,
    repeat_center: bool,
    measure: MeasureSpec,
    orthonormal: bool,
    points: usize,
) -> Result<String, CliError> {
    if points < 2 {
        return Err(CliError::at(Stage::Validation)(SddError::arg("--points must be at least 2")));
    }
    let (a, b) = measure.support();
    let knots = if repeat_center {
        KnotSequence::open_uniform_repeated_center(a, b, degree, elements)
    } else {
        KnotSequence::open_uniform(a, b, degree, elements, &[])
    }
    .map_err(CliError::at(Stage::Validation))?;
    let n = knots.basis_count();
    let basis = if orthonormal {
        Some(OrthonormalBasis1D::whiten(knots.clone(), measure).map_err(CliError::at(Stage::Basis))?)
    } else {
        None
    };
    let prefix = if orthonormal { "psi" } else { "B" };
    let mut out = String::from("x");
    for i in 1..=n {
        let _ = write!(out, ",{prefix}_{i}");
    }
    out.push('\n');
    for j in 0..points {
        let x = if j + 1 == points {
            b
        } else {
            a + (b - a) * j as f64 / (points - 1) as f64
        };
        let values = match &basis {
            Some(psi) => psi.eval(x),
            None => eval_all(&knots, x),
        }
        .map_err(CliError::at(Stage::Basis))?;
        out.push_str(&sci(x));
        for v in values {
            out.push(',');
            out.push_str(&sci(v));
        }
        out.push('\n');
    }
    Ok(out)
}
