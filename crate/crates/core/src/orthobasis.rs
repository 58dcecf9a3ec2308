//! Measure-consistent orthonormal spline bases for a single coordinate.
//!
//! The first B-spline is replaced by the constant 1, giving the auxiliary
//! vector `P(x)`. Its moment matrix `G = E[P Pᵀ]` is factored as `G = Q Qᵀ`
//! with `Q` lower-triangular, and the orthonormal basis is `ψ(x) = Q⁻¹ P(x)`,
//! evaluated by forward substitution. Because `Q⁻¹` is lower-triangular and
//! `G[0][0] = 1`, `ψ_0 ≡ 1` and every other element has zero mean.

use crate::bspline::eval_nonzero_into;
use crate::error::{Result, SddError};
use crate::knots::KnotSequence;
use crate::measures::{measure_quadrature, MeasureSpec};

/// Relative pivot threshold for the Cholesky factorization of `G`.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Auxiliary vector `(1, B_1(x), …, B_{n-1}(x))`.
pub fn auxiliary_vector(knots: &KnotSequence, x: f64) -> Result<Vec<f64>> {
    let mut out = crate::bspline::eval_all(knots, x)?;
    out[0] = 1.0;
    Ok(out)
}

/// Quadrature points per element used to assemble the moment matrix.
///
/// `p + 3` integrates `P Pᵀ` exactly against a uniform density. Polynomial
/// Beta densities add half their degree; other densities get ten extra points.
pub fn default_points_per_element(degree: usize, measure: &MeasureSpec) -> usize {
    let extra = match measure.polynomial_density_degree() {
        Some(d) => d.div_ceil(2),
        None => 10,
    };
    degree + 3 + extra
}

/// Spline moment matrix `E[P Pᵀ]`, row-major `n × n`.
pub fn moment_matrix(knots: &KnotSequence, measure: &MeasureSpec) -> Result<Vec<f64>> {
    moment_matrix_with(
        knots,
        measure,
        default_points_per_element(knots.degree(), measure),
    )
}

/// Moment matrix with an explicit quadrature order per element.
pub fn moment_matrix_with(
    knots: &KnotSequence,
    measure: &MeasureSpec,
    points_per_element: usize,
) -> Result<Vec<f64>> {
    check_support(knots, measure)?;
    let n = knots.basis_count();
    let p = knots.degree();
    let rule = measure_quadrature(measure, knots.interior_distinct(), points_per_element)?;
    let mut g = vec![0.0; n * n];
    let mut local = vec![0.0; p + 1];
    let mut aux: Vec<(usize, f64)> = Vec::with_capacity(p + 2);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let first = eval_nonzero_into(knots, x, &mut local);
        aux.clear();
        aux.push((0, 1.0));
        aux.extend(
            local
                .iter()
                .enumerate()
                .map(|(r, &b)| (first + r, b))
                .filter(|&(i, _)| i > 0),
        );
        for (a, &(i, bi)) in aux.iter().enumerate() {
            for &(j, bj) in &aux[a..] {
                g[i * n + j] += w * bi * bj;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            g[i * n + j] = g[j * n + i];
        }
    }
    Ok(g)
}

fn check_support(knots: &KnotSequence, measure: &MeasureSpec) -> Result<()> {
    if knots.lower() != measure.lower() || knots.upper() != measure.upper() {
        return Err(SddError::arg(format!(
            "knots span [{}, {}] but the measure is supported on [{}, {}]",
            knots.lower(),
            knots.upper(),
            measure.lower(),
            measure.upper()
        )));
    }
    Ok(())
}

/// Lower-triangular Cholesky factor of a symmetric matrix, row-major.
///
/// Fails when a pivot drops below `PIVOT_TOLERANCE` times the largest diagonal entry.
pub fn cholesky(g: &[f64], n: usize) -> Result<Vec<f64>> {
    assert_eq!(g.len(), n * n);
    let max_diag = (0..n).map(|i| g[i * n + i]).fold(0.0, f64::max);
    let threshold = PIVOT_TOLERANCE * max_diag;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut pivot = g[j * n + j];
        for k in 0..j {
            pivot -= l[j * n + k] * l[j * n + k];
        }
        if !(pivot > threshold) {
            return Err(SddError::Conditioning {
                index: j,
                pivot,
                threshold,
            });
        }
        let d = pivot.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = g[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(l)
}

/// Whitened spline basis for one coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis1D {
    measure: MeasureSpec,
    knots: KnotSequence,
    /// Lower-triangular Cholesky factor `Q` of the moment matrix, row-major.
    whitening: Vec<f64>,
}

impl OrthonormalBasis1D {
    /// Assembles `G`, factors it and stores the factor.
    pub fn whiten(knots: KnotSequence, measure: MeasureSpec) -> Result<Self> {
        let ppe = default_points_per_element(knots.degree(), &measure);
        Self::whiten_with(knots, measure, ppe)
    }

    pub fn whiten_with(
        knots: KnotSequence,
        measure: MeasureSpec,
        points_per_element: usize,
    ) -> Result<Self> {
        let g = moment_matrix_with(&knots, &measure, points_per_element)?;
        let whitening = cholesky(&g, knots.basis_count())?;
        Ok(Self {
            measure,
            knots,
            whitening,
        })
    }

    /// Rebuilds a basis from a stored factor, checking its shape.
    pub fn from_parts(knots: KnotSequence, measure: MeasureSpec, whitening: Vec<f64>) -> Result<Self> {
        check_support(&knots, &measure)?;
        let n = knots.basis_count();
        if whitening.len() != n * n {
            return Err(SddError::arg(format!(
                "whitening matrix has {} entries, expected {}",
                whitening.len(),
                n * n
            )));
        }
        let lower_triangular = (0..n).all(|i| whitening[i * n + i] > 0.0)
            && (0..n).all(|i| (i + 1..n).all(|j| whitening[i * n + j] == 0.0));
        if !lower_triangular {
            return Err(SddError::arg(
                "whitening matrix must be lower-triangular with a positive diagonal",
            ));
        }
        Ok(Self {
            measure,
            knots,
            whitening,
        })
    }

    pub fn len(&self) -> usize {
        self.knots.basis_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn knots(&self) -> &KnotSequence {
        &self.knots
    }

    pub fn measure(&self) -> &MeasureSpec {
        &self.measure
    }

    pub fn whitening(&self) -> &[f64] {
        &self.whitening
    }

    /// `(ψ_0(x), …, ψ_{n-1}(x))`.
    pub fn eval(&self, x: f64) -> Result<Vec<f64>> {
        self.measure.check_domain(x)?;
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out);
        Ok(out)
    }

    /// Unchecked evaluation into a caller buffer of length `n`.
    pub(crate) fn eval_into(&self, x: f64, out: &mut [f64]) {
        let n = self.len();
        let p = self.knots.degree();
        let first = eval_nonzero_into(&self.knots, x, &mut out[..=p]);
        if first > 0 {
            out.copy_within(0..=p, first);
            out[..first].fill(0.0);
        }
        out[first + p + 1..].fill(0.0);
        out[0] = 1.0;
        let q = &self.whitening;
        for i in 0..n {
            let row = &q[i * n..i * n + i];
            let s: f64 = row.iter().zip(&out[..i]).map(|(a, b)| a * b).sum();
            out[i] = (out[i] - s) / q[i * n + i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use crate::bspline::eval_all;
    use crate::measures::composite_legendre;

    fn figure_knots() -> KnotSequence {
        KnotSequence::open_uniform(-1.0, 1.0, 2, 4, &[]).unwrap()
    }

    fn uniform() -> MeasureSpec {
        MeasureSpec::uniform(-1.0, 1.0).unwrap()
    }

    fn figure_measures() -> Vec<MeasureSpec> {
        vec![
            uniform(),
            MeasureSpec::truncated_gaussian(-1.0, 1.0, -0.5, 0.5).unwrap(),
            MeasureSpec::beta(-1.0, 1.0, 3.0, 2.0).unwrap(),
        ]
    }

    /// Gram matrix of ψ under an independent high-order rule: 40 elements of
    /// 30-point Gauss–Legendre against the density.
    fn oracle_gram(basis: &OrthonormalBasis1D) -> (Vec<f64>, Vec<f64>) {
        let n = basis.len();
        let (a, b) = basis.measure().support();
        let mut breaks: Vec<f64> = (1..40).map(|j| a + (b - a) * j as f64 / 40.0).collect();
        breaks.extend_from_slice(basis.knots().interior_distinct());
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let rule = composite_legendre(a, b, &breaks, 30).unwrap();
        let mut gram = vec![0.0; n * n];
        let mut mean = vec![0.0; n];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let wd = w * basis.measure().density(x).unwrap();
            let psi = basis.eval(x).unwrap();
            for i in 0..n {
                mean[i] += wd * psi[i];
                for j in 0..n {
                    gram[i * n + j] += wd * psi[i] * psi[j];
                }
            }
        }
        (gram, mean)
    }

    #[test]
    fn auxiliary_vector_replaces_first_spline() {
        let k = figure_knots();
        let at_a = auxiliary_vector(&k, -1.0).unwrap();
        assert_eq!(at_a, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let x = 0.25;
        let aux = auxiliary_vector(&k, x).unwrap();
        let full = eval_all(&k, x).unwrap();
        assert_eq!(&aux[1..], &full[1..]);
        assert_abs_diff_eq!(aux.iter().sum::<f64>(), 2.0, epsilon = 1e-15);
        assert!(auxiliary_vector(&k, 2.0).is_err());
    }

    #[test]
    fn piecewise_constant_moment_matrix() {
        let k = KnotSequence::open_uniform(-1.0, 1.0, 0, 2, &[]).unwrap();
        let g = moment_matrix(&k, &uniform()).unwrap();
        let expected = [1.0, 0.5, 0.5, 0.5];
        for (got, want) in g.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn moment_matrix_is_symmetric_with_unit_corner() {
        for m in figure_measures() {
            let g = moment_matrix(&figure_knots(), &m).unwrap();
            let n = 6;
            assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-14);
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(g[i * n + j], g[j * n + i]);
                }
            }
        }
    }

    #[test]
    fn piecewise_constant_whitened_by_hand() {
        let k = KnotSequence::open_uniform(-1.0, 1.0, 0, 2, &[]).unwrap();
        let basis = OrthonormalBasis1D::whiten(k, uniform()).unwrap();
        let left = basis.eval(-0.5).unwrap();
        assert_abs_diff_eq!(left[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(left[1], -1.0, epsilon = 1e-14);
        let right = basis.eval(0.5).unwrap();
        assert_abs_diff_eq!(right[1], 1.0, epsilon = 1e-14);
        let right = basis.eval(0.0).unwrap();
        assert_abs_diff_eq!(right[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn figure_bases_are_orthonormal_for_each_measure() {
        for m in figure_measures() {
            let basis = OrthonormalBasis1D::whiten(figure_knots(), m).unwrap();
            let (gram, mean) = oracle_gram(&basis);
            let n = basis.len();
            for i in 0..n {
                for j in 0..n {
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((gram[i * n + j] - target).abs() <= 1e-8);
                }
            }
            assert!((mean[0] - 1.0).abs() <= 1e-10);
            assert!(mean[1..].iter().all(|v| v.abs() <= 1e-10), "{mean:?}");
        }
    }

    #[test]
    fn first_element_is_constant() {
        for m in figure_measures() {
            let basis = OrthonormalBasis1D::whiten(figure_knots(), m).unwrap();
            for j in 0..=20 {
                let x = -1.0 + j as f64 / 10.0;
                assert!((basis.eval(x).unwrap()[0] - 1.0).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn span_is_preserved() {
        // Least-squares projection of every B-spline onto the ψ columns over 50 points.
        use nalgebra::{DMatrix, DVector};
        let k = KnotSequence::open_uniform(-1.0, 1.0, 3, 5, &[(2, 2)]).unwrap();
        let basis = OrthonormalBasis1D::whiten(k.clone(), figure_measures()[2].clone()).unwrap();
        let n = basis.len();
        let xs: Vec<f64> = (0..50).map(|j| -1.0 + 2.0 * (j as f64 + 0.37) / 50.0).collect();
        let psi = DMatrix::from_fn(50, n, |r, c| basis.eval(xs[r]).unwrap()[c]);
        let qr = psi.clone().qr();
        for i in 0..n {
            let target = DVector::from_fn(50, |r, _| eval_all(&k, xs[r]).unwrap()[i]);
            let coef = qr.r().solve_upper_triangular(&(qr.q().transpose() * &target)).unwrap();
            let residual = (&psi * coef - &target).amax();
            assert!(residual <= 1e-8, "B_{i} residual {residual}");
        }
    }

    #[test]
    fn whitening_is_deterministic() {
        let m = figure_measures()[1].clone();
        let a = OrthonormalBasis1D::whiten(figure_knots(), m.clone()).unwrap();
        let b = OrthonormalBasis1D::whiten(figure_knots(), m).unwrap();
        assert_eq!(a.whitening(), b.whitening());
    }

    #[test]
    fn singular_matrix_names_the_pivot() {
        let g = [1.0, 1.0, 1.0, 1.0];
        match cholesky(&g, 2) {
            Err(SddError::Conditioning { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected conditioning error, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_support_is_rejected() {
        let m = MeasureSpec::uniform(0.0, 1.0).unwrap();
        assert!(OrthonormalBasis1D::whiten(figure_knots(), m).is_err());
    }

    #[test]
    fn stored_factor_round_trips() {
        let basis = OrthonormalBasis1D::whiten(figure_knots(), uniform()).unwrap();
        let rebuilt = OrthonormalBasis1D::from_parts(
            basis.knots().clone(),
            basis.measure().clone(),
            basis.whitening().to_vec(),
        )
        .unwrap();
        assert_eq!(rebuilt, basis);
        let mut broken = basis.whitening().to_vec();
        broken[1] = 0.5;
        assert!(OrthonormalBasis1D::from_parts(figure_knots(), uniform(), broken).is_err());
    }
}
