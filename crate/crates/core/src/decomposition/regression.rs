//! Coefficients by least squares on input/output samples.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{EvalScratch, ExpansionSetup, FitDiagnostics, FitMethod, SddExpansion, SurrogateSample};
use crate::error::{Result, SddError};

/// Condition estimates above this are flagged in the fit diagnostics.
pub const CONDITION_WARNING: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionOptions {
    /// Tikhonov weight added to the normal-equation diagonal of every
    /// non-constant coefficient.
    pub ridge: Option<f64>,
    /// Minimum ratio of samples to coefficients.
    pub min_oversampling: f64,
}

impl Default for RegressionOptions {
    fn default() -> Self {
        Self {
            ridge: None,
            min_oversampling: 2.0,
        }
    }
}

impl ExpansionSetup {
    /// Design matrix with columns `{1, Ψ_t}` evaluated at the sample inputs.
    pub fn design_matrix(&self, inputs: &[&[f64]]) -> Result<DMatrix<f64>> {
        for x in inputs {
            if !self.measure.contains(x) {
                return Err(SddError::arg(format!(
                    "sample {x:?} lies outside the support box"
                )));
            }
        }
        let cols = self.coefficient_count();
        let rows: Vec<f64> = inputs
            .par_iter()
            .map_init(
                || EvalScratch::new(&self.bases),
                |scratch, x| {
                    scratch.load(&self.bases, x);
                    let mut row = Vec::with_capacity(cols);
                    row.push(1.0);
                    row.extend(self.terms.iter().map(|t| scratch.product(t)));
                    row
                },
            )
            .flatten_iter()
            .collect();
        Ok(DMatrix::from_row_slice(inputs.len(), cols, &rows))
    }

    /// Least-squares fit through a Householder QR of the design matrix.
    pub fn fit_regression(
        &self,
        samples: &[SurrogateSample],
        options: RegressionOptions,
    ) -> Result<SddExpansion> {
        let cols = self.coefficient_count();
        let rows = samples.len();
        if rows < cols {
            return Err(SddError::arg(format!(
                "{rows} samples cannot determine {cols} coefficients"
            )));
        }
        let needed = (options.min_oversampling * cols as f64).ceil() as usize;
        if rows < needed {
            return Err(SddError::arg(format!(
                "{rows} samples for {cols} coefficients is below the required oversampling \
                 of {} ({needed} samples)",
                options.min_oversampling
            )));
        }
        if let Some(ridge) = options.ridge {
            if !(ridge >= 0.0 && ridge.is_finite()) {
                return Err(SddError::arg(format!("ridge weight {ridge} must be non-negative")));
            }
        }
        let inputs: Vec<&[f64]> = samples.iter().map(|s| s.x.as_slice()).collect();
        let mut design = self.design_matrix(&inputs)?;
        let mut rhs = DVector::from_iterator(rows, samples.iter().map(|s| s.y));

        if let Some(ridge) = options.ridge.filter(|&r| r > 0.0) {
            // Augmenting with sqrt(λ)·I rows is the normal-equation ridge without forming AᵀA.
            let extra = cols - 1;
            let root = ridge.sqrt();
            design = design.resize_vertically(rows + extra, 0.0);
            for j in 1..cols {
                design[(rows + j - 1, j)] = root;
            }
            rhs = rhs.resize_vertically(rows + extra, 0.0);
        }

        let qr = design.qr();
        qr.q_tr_mul(&mut rhs);
        let r = qr.r();
        let singular_values = r.clone().singular_values();
        let smax = singular_values.max();
        let smin = singular_values.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(smin > f64::EPSILON * smax) {
            return Err(SddError::arg(format!(
                "design matrix is rank deficient (condition estimate {condition:e})"
            )));
        }
        let head = rhs.rows(0, cols).into_owned();
        let solution = r
            .solve_upper_triangular(&head)
            .ok_or_else(|| SddError::arg("design matrix is rank deficient"))?;

        let mut warnings = Vec::new();
        if condition > CONDITION_WARNING {
            log::warn!("regression design condition estimate {condition:e}");
            warnings.push(format!(
                "design condition estimate {condition:e} exceeds {CONDITION_WARNING:e}"
            ));
        }
        Ok(SddExpansion {
            setup: self.clone(),
            y0: solution[0],
            coefficients: solution.iter().skip(1).copied().collect(),
            diagnostics: FitDiagnostics {
                method: FitMethod::Regression {
                    samples: rows,
                    ridge: options.ridge,
                },
                condition_estimate: Some(condition),
                warnings,
            },
        })
    }
}
