//! Coefficients by full tensor-product quadrature.
//!
//! The output is evaluated once on the tensor grid of per-coordinate composite
//! rules. Each coordinate is then contracted against its weighted orthonormal
//! basis in turn, which yields every coefficient of the full tensor space at
//! once; the retained terms are read off that tensor.

use rayon::prelude::*;

use super::{ExpansionSetup, FitDiagnostics, FitMethod, SddExpansion};
use crate::error::{Result, SddError};
use crate::measures::{measure_quadrature, merge_breakpoints};

/// Largest input dimension for which quadrature fitting is offered.
pub const MAX_QUADRATURE_DIM: usize = 6;

const MAX_GRID_POINTS: usize = 200_000_000;

impl ExpansionSetup {
    /// Fits every coefficient as `E[y Ψ]` by tensor quadrature.
    ///
    /// Each coordinate's rule splits at its interior knots and at the entries of
    /// `breakpoints[k]` (declared kinks of `y`); an empty slice means knots only.
    pub fn fit_quadrature<F>(
        &self,
        y: F,
        breakpoints: &[Vec<f64>],
        points_per_element: usize,
    ) -> Result<SddExpansion>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let coeffs = self.full_tensor_coefficients(&y, breakpoints, points_per_element)?;
        Ok(self.select_terms(&coeffs, points_per_element))
    }

    /// Repeats the quadrature fit with doubled points per element until no
    /// coefficient moves by more than `tolerance`, up to `max_points`.
    pub fn fit_quadrature_converged<F>(
        &self,
        y: F,
        breakpoints: &[Vec<f64>],
        start_points: usize,
        tolerance: f64,
        max_points: usize,
    ) -> Result<SddExpansion>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let mut points = start_points.max(1);
        let mut current = self.fit_quadrature(&y, breakpoints, points)?;
        loop {
            let next_points = points * 2;
            if next_points > max_points {
                let mut fit = current;
                fit.diagnostics.warnings.push(format!(
                    "coefficients not converged to {tolerance:e} at {points} points per element"
                ));
                return Ok(fit);
            }
            let next = self.fit_quadrature(&y, breakpoints, next_points)?;
            let change = std::iter::once((current.y0, next.y0))
                .chain(current.coefficients.iter().copied().zip(next.coefficients.iter().copied()))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            log::debug!("quadrature escalation {points} -> {next_points}: max change {change:e}");
            if change <= tolerance {
                return Ok(next);
            }
            current = next;
            points = next_points;
        }
    }

    fn full_tensor_coefficients<F>(
        &self,
        y: &F,
        breakpoints: &[Vec<f64>],
        points_per_element: usize,
    ) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let dim = self.dim();
        if dim > MAX_QUADRATURE_DIM {
            return Err(SddError::Unsupported(format!(
                "quadrature fitting supports N <= {MAX_QUADRATURE_DIM}, got N = {dim}; use regression"
            )));
        }
        if !breakpoints.is_empty() && breakpoints.len() != dim {
            return Err(SddError::arg(format!(
                "breakpoints given for {} coordinates, expansion has {dim}",
                breakpoints.len()
            )));
        }

        // Per coordinate: nodes and the weighted basis matrix M[i][j] = ψ_i(x_j) w_j.
        let mut nodes: Vec<Vec<f64>> = Vec::with_capacity(dim);
        let mut weighted: Vec<Vec<f64>> = Vec::with_capacity(dim);
        for (k, basis) in self.bases.iter().enumerate() {
            let extra: &[f64] = breakpoints.get(k).map(Vec::as_slice).unwrap_or(&[]);
            let breaks = merge_breakpoints([basis.knots().interior_distinct(), extra]);
            let rule = measure_quadrature(basis.measure(), &breaks, points_per_element)?;
            let n = basis.len();
            let q = rule.len();
            let mut m = vec![0.0; n * q];
            let mut psi = vec![0.0; n];
            for (j, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                basis.eval_into(x, &mut psi);
                for i in 0..n {
                    m[i * q + j] = psi[i] * w;
                }
            }
            nodes.push(rule.nodes);
            weighted.push(m);
        }

        let shape: Vec<usize> = nodes.iter().map(Vec::len).collect();
        let total: usize = shape.iter().try_fold(1usize, |acc, &q| acc.checked_mul(q)).unwrap_or(usize::MAX);
        if total > MAX_GRID_POINTS {
            return Err(SddError::Unsupported(format!(
                "tensor grid of {total} points exceeds {MAX_GRID_POINTS}; lower points_per_element or use regression"
            )));
        }

        // Output on the grid, coordinate 0 slowest.
        let inner: usize = shape[1..].iter().product();
        let mut grid = vec![0.0; total];
        grid.par_chunks_mut(inner.max(1))
            .enumerate()
            .for_each(|(j0, chunk)| {
                let mut x = vec![0.0; dim];
                x[0] = nodes[0][j0];
                for (flat, slot) in chunk.iter_mut().enumerate() {
                    let mut rest = flat;
                    for k in (1..dim).rev() {
                        let q = shape[k];
                        x[k] = nodes[k][rest % q];
                        rest /= q;
                    }
                    *slot = y(&x);
                }
            });

        let mut dims = shape.clone();
        let mut tensor = grid;
        for k in 0..dim {
            let n = self.bases[k].len();
            tensor = contract_mode(&tensor, &dims, k, &weighted[k], n);
            dims[k] = n;
        }
        Ok(tensor)
    }

    fn select_terms(&self, full: &[f64], points_per_element: usize) -> SddExpansion {
        let counts: Vec<usize> = self.bases.iter().map(|b| b.len()).collect();
        let offset = |term: &super::Term| -> usize {
            let mut idx = vec![0usize; counts.len()];
            for (k, i) in term.factors() {
                idx[k] = i;
            }
            idx.iter().zip(&counts).fold(0, |acc, (&i, &n)| acc * n + i)
        };
        let coefficients = self.terms.iter().map(|t| full[offset(t)]).collect();
        SddExpansion {
            setup: self.clone(),
            y0: full[0],
            coefficients,
            diagnostics: FitDiagnostics {
                method: FitMethod::Quadrature { points_per_element },
                condition_estimate: None,
                warnings: Vec::new(),
            },
        }
    }
}

/// Replaces axis `axis` (length `q`) of a row-major tensor by `n` rows of `m · (slice)`.
fn contract_mode(tensor: &[f64], dims: &[usize], axis: usize, m: &[f64], n: usize) -> Vec<f64> {
    let q = dims[axis];
    let left: usize = dims[..axis].iter().product();
    let right: usize = dims[axis + 1..].iter().product();
    let mut out = vec![0.0; left * n * right];
    out.par_chunks_mut(n * right)
        .zip(tensor.par_chunks(q * right))
        .for_each(|(dst, src)| {
            for i in 0..n {
                let row = &m[i * q..(i + 1) * q];
                let acc = &mut dst[i * right..(i + 1) * right];
                for (j, &mij) in row.iter().enumerate() {
                    if mij == 0.0 {
                        continue;
                    }
                    let s = &src[j * right..(j + 1) * right];
                    for (a, &v) in acc.iter_mut().zip(s) {
                        *a += mij * v;
                    }
                }
            }
        });
    out
}
