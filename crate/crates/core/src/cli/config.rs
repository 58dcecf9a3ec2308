//! Run configuration: one JSON document, unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bench::{self, BenchmarkFunction};
use crate::error::{Result, SddError};
use crate::knots::KnotSequence;
use crate::measures::{MeasureSpec, ProductMeasure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Built-in output function; exclusive with `samples`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<BenchmarkConfig>,
    /// CSV of N input columns and one output column; exclusive with `benchmark`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<PathBuf>,
    /// One entry per input, or a single entry applied to every input.
    pub coordinates: Vec<CoordinateConfig>,
    pub method: Method,
    /// Interaction order; defaults to N for `pce` and is required otherwise.
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    pub fitting: FittingConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcs: Option<McsConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub params: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordinateConfig {
    /// Optional for benchmarks, which carry their own input law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    pub knots: KnotConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnotConfig {
    pub p: usize,
    /// Uniform elements on the support; ignored when `sequence` is given.
    #[serde(default = "one")]
    pub elements: usize,
    /// Doubles the central knot of a uniform mesh.
    #[serde(default)]
    pub repeat_center: bool,
    /// Full knot sequence including the repeated end knots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<f64>>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sdd,
    Pdd,
    Pce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum FittingConfig {
    Quadrature {
        points_per_element: usize,
        /// When set, points per element double until coefficients settle to this.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Regression {
        /// Number of benchmark evaluations; must be absent for sample files.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        #[serde(default)]
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ridge: Option<f64>,
        #[serde(default = "two")]
        min_oversampling: f64,
    },
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default = "yes")]
    pub expansion: bool,
    #[serde(default = "yes")]
    pub coefficients: bool,
    #[serde(default = "yes")]
    pub variance_decomposition: bool,
    /// Needs an `mcs` block.
    #[serde(default)]
    pub cdf: bool,
    /// Keep every `cdf_stride`-th order statistic in the CDF file.
    #[serde(default = "hundred")]
    pub cdf_stride: usize,
}

fn yes() -> bool {
    true
}

fn hundred() -> usize {
    100
}

impl Default for OutputsConfig {
    fn default() -> Self {
        Self {
            expansion: true,
            coefficients: true,
            variance_decomposition: true,
            cdf: false,
            cdf_stride: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McsConfig {
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

/// The output being approximated.
pub enum Target {
    Benchmark(Box<dyn BenchmarkFunction>),
    Samples(Vec<(Vec<f64>, f64)>),
}

/// A configuration that has passed every check that does not need numerics.
pub struct ValidatedRun {
    pub config: RunConfig,
    pub target: Target,
    pub measure: ProductMeasure,
    pub knots: Vec<KnotSequence>,
    pub order: usize,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Overrides every seed in the configuration.
    pub fn set_seed(&mut self, seed: u64) {
        if let FittingConfig::Regression { seed: s, .. } = &mut self.fitting {
            *s = seed;
        }
        if let Some(m) = &mut self.mcs {
            m.seed = seed;
        }
    }

    /// Resolves the target, measures and knot sequences and checks their
    /// consistency. Sample files are read here, so a bad file fails validation.
    pub fn validate(self) -> Result<ValidatedRun> {
        let target = match (&self.benchmark, &self.samples) {
            (Some(b), None) => Target::Benchmark(bench::by_name(&b.name, &b.params)?),
            (None, Some(path)) => Target::Samples(read_samples(path)?),
            _ => {
                return Err(SddError::arg(
                    "exactly one of 'benchmark' and 'samples' must be given",
                ))
            }
        };
        let dim = match &target {
            Target::Benchmark(f) => f.dim(),
            Target::Samples(rows) => rows[0].0.len(),
        };
        let coords: Vec<CoordinateConfig> = match self.coordinates.len() {
            1 => vec![self.coordinates[0].clone(); dim],
            n if n == dim => self.coordinates.clone(),
            n => {
                return Err(SddError::arg(format!(
                    "{n} coordinate entries for N = {dim} inputs (give 1 or {dim})"
                )))
            }
        };
        let measures = coords
            .iter()
            .enumerate()
            .map(|(k, c)| match (&c.measure, &target) {
                (Some(m), _) => Ok(m.clone()),
                (None, Target::Benchmark(f)) => Ok(f.measure().components()[k].clone()),
                (None, Target::Samples(_)) => Err(SddError::arg(format!(
                    "coordinate {} needs a measure when fitting to a sample file",
                    k + 1
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        if let Target::Benchmark(f) = &target {
            if measures != f.measure().components() {
                return Err(SddError::arg(format!(
                    "measures must match the input law of benchmark '{}'",
                    f.name()
                )));
            }
        }
        let measure = ProductMeasure::new(measures)?;
        if let Target::Samples(rows) = &target {
            if let Some((x, _)) = rows.iter().find(|(x, _)| !measure.contains(x)) {
                return Err(SddError::arg(format!(
                    "sample {x:?} lies outside the support box"
                )));
            }
        }

        let knots = coords
            .iter()
            .zip(measure.components())
            .map(|(c, m)| build_knots(&c.knots, m, self.method))
            .collect::<Result<Vec<_>>>()?;

        let order = match (self.method, self.order) {
            (Method::Pce, None) => dim,
            (Method::Pce, Some(s)) if s != dim => {
                return Err(SddError::arg(format!("pce needs S = N = {dim}, got S = {s}")))
            }
            (_, Some(s)) => s,
            (_, None) => return Err(SddError::arg("'S' is required for sdd and pdd")),
        };
        if order == 0 || order > dim {
            return Err(SddError::arg(format!("S = {order} must lie in 1..={dim}")));
        }

        match (&self.fitting, &target) {
            (FittingConfig::Quadrature { .. }, Target::Samples(_)) => {
                return Err(SddError::arg("a sample file can only be fitted by regression"))
            }
            (FittingConfig::Quadrature { points_per_element, tolerance }, _) => {
                if *points_per_element == 0 {
                    return Err(SddError::arg("points_per_element must be at least 1"));
                }
                if tolerance.is_some_and(|t| !(t > 0.0)) {
                    return Err(SddError::arg("quadrature tolerance must be positive"));
                }
                if dim > crate::decomposition::MAX_QUADRATURE_DIM {
                    return Err(SddError::arg(format!(
                        "quadrature fitting supports N <= {}; use regression",
                        crate::decomposition::MAX_QUADRATURE_DIM
                    )));
                }
            }
            (FittingConfig::Regression { samples: Some(_), .. }, Target::Samples(_)) => {
                return Err(SddError::arg(
                    "regression 'samples' count applies to benchmarks only",
                ))
            }
            (FittingConfig::Regression { samples: None, .. }, Target::Benchmark(_)) => {
                return Err(SddError::arg("regression on a benchmark needs a 'samples' count"))
            }
            (FittingConfig::Regression { ridge, min_oversampling, .. }, _) => {
                if ridge.is_some_and(|r| !(r >= 0.0 && r.is_finite())) {
                    return Err(SddError::arg("ridge must be a finite non-negative number"));
                }
                if !(*min_oversampling >= 1.0) {
                    return Err(SddError::arg("min_oversampling must be at least 1"));
                }
            }
        }
        if self.outputs.cdf && self.mcs.is_none() {
            return Err(SddError::arg("the cdf output needs an 'mcs' block"));
        }
        if self.outputs.cdf_stride == 0 {
            return Err(SddError::arg("cdf_stride must be at least 1"));
        }
        if self.mcs.as_ref().is_some_and(|m| m.count < 2) {
            return Err(SddError::arg("mcs count must be at least 2"));
        }

        Ok(ValidatedRun {
            config: self,
            target,
            measure,
            knots,
            order,
        })
    }
}

fn build_knots(cfg: &KnotConfig, m: &MeasureSpec, method: Method) -> Result<KnotSequence> {
    let (a, b) = m.support();
    if method != Method::Sdd {
        if cfg.elements != 1 || cfg.repeat_center || cfg.sequence.is_some() {
            return Err(SddError::arg(
                "pdd and pce use polynomial bases: give only 'p' in the knot entry",
            ));
        }
        if cfg.p == 0 {
            return Err(SddError::arg("pdd and pce need p >= 1"));
        }
        return KnotSequence::bernstein(a, b, cfg.p);
    }
    let knots = match &cfg.sequence {
        Some(seq) => KnotSequence::new(seq.clone(), cfg.p)?,
        None if cfg.repeat_center => {
            KnotSequence::open_uniform_repeated_center(a, b, cfg.p, cfg.elements)?
        }
        None => KnotSequence::open_uniform(a, b, cfg.p, cfg.elements, &[])?,
    };
    if knots.lower() != a || knots.upper() != b {
        return Err(SddError::arg(format!(
            "knot sequence spans [{}, {}] but the measure support is [{a}, {b}]",
            knots.lower(),
            knots.upper()
        )));
    }
    Ok(knots)
}

/// Reads `x_1, …, x_N, y` rows after a header line.
pub fn read_samples(path: &Path) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| SddError::arg(format!("cannot read samples {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    let mut width = None;
    for (line, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| SddError::arg(format!("{}: {e}", path.display())))?;
        let values = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|_| {
                    SddError::arg(format!(
                        "{} row {}: '{field}' is not a number",
                        path.display(),
                        line + 2
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() < 2 || width.is_some_and(|w| w != values.len()) {
            return Err(SddError::arg(format!(
                "{} row {}: expected N input columns and one output column",
                path.display(),
                line + 2
            )));
        }
        width = Some(values.len());
        let (x, y) = values.split_at(values.len() - 1);
        rows.push((x.to_vec(), y[0]));
    }
    if rows.is_empty() {
        return Err(SddError::arg(format!("{} holds no samples", path.display())));
    }
    Ok(rows)
}
