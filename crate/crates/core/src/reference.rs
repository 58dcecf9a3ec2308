//! Polynomial special cases of the spline expansion.
//!
//! With no interior knots the spline space of each coordinate is the space of
//! polynomials of degree `p`, so the spline pipeline reproduces the polynomial
//! dimensional decomposition (PDD) of order `S`, and with `S = N` the
//! tensor-product polynomial chaos expansion (PCE).
//!
//! [`LegendreExpansion`] builds the same polynomial expansions for uniform
//! inputs straight from orthonormal Legendre polynomials, without any spline
//! machinery, and serves as the independent side of equivalence checks.

use std::collections::BTreeMap;

use crate::decomposition::{ExpansionSetup, SddExpansion, SubsetIndex, VarianceDecomposition};
use crate::error::{Result, SddError};
use crate::knots::KnotSequence;
use crate::measures::{measure_quadrature, merge_breakpoints, Family, ProductMeasure};
use crate::orthobasis::OrthonormalBasis1D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    /// Full tensor-product expansion of degree `degree` per coordinate.
    Pce { degree: usize },
    /// Dimensionwise expansion truncated at `order`.
    Pdd { degree: usize, order: usize },
}

impl ReferenceKind {
    pub fn degree(&self) -> usize {
        match *self {
            ReferenceKind::Pce { degree } | ReferenceKind::Pdd { degree, .. } => degree,
        }
    }

    pub fn order(&self, dim: usize) -> usize {
        match *self {
            ReferenceKind::Pce { .. } => dim,
            ReferenceKind::Pdd { order, .. } => order,
        }
    }
}

/// Spline setup with single-element knot sequences, i.e. polynomial bases.
pub fn build_reference(kind: ReferenceKind, measure: &ProductMeasure) -> Result<ExpansionSetup> {
    let degree = kind.degree();
    if degree == 0 {
        return Err(SddError::arg("polynomial reference expansions need degree >= 1"));
    }
    let bases = measure
        .components()
        .iter()
        .map(|m| {
            let knots = KnotSequence::bernstein(m.lower(), m.upper(), degree)?;
            OrthonormalBasis1D::whiten(knots, m.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    ExpansionSetup::new(bases, kind.order(measure.dim()))
}

/// Orthonormal Legendre values `φ_0..φ_degree` at `x` for the uniform law on `[a, b]`.
pub fn legendre_orthonormal(degree: usize, a: f64, b: f64, x: f64) -> Vec<f64> {
    let t = (2.0 * x - a - b) / (b - a);
    let mut p = Vec::with_capacity(degree + 1);
    p.push(1.0);
    if degree >= 1 {
        p.push(t);
    }
    for k in 2..=degree {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * t * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
        p.push(next);
    }
    p.iter()
        .enumerate()
        .map(|(j, v)| v * ((2 * j + 1) as f64).sqrt())
        .collect()
}

/// Legendre-polynomial expansion for independent uniform inputs.
#[derive(Debug, Clone)]
pub struct LegendreExpansion {
    degree: usize,
    order: usize,
    supports: Vec<(f64, f64)>,
    y0: f64,
    /// Multi-indices with 1..=order nonzero entries, in subset order.
    terms: Vec<(Vec<usize>, f64)>,
}

impl LegendreExpansion {
    /// Fits coefficients by direct tensor quadrature sums.
    pub fn fit<F>(
        y: F,
        measure: &ProductMeasure,
        kind: ReferenceKind,
        breakpoints: &[Vec<f64>],
        points_per_element: usize,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let dim = measure.dim();
        let degree = kind.degree();
        let order = kind.order(dim);
        if degree == 0 || order == 0 || order > dim {
            return Err(SddError::arg(format!(
                "invalid reference configuration: degree {degree}, order {order}, N = {dim}"
            )));
        }
        if dim > 4 {
            return Err(SddError::Unsupported(
                "the Legendre oracle is limited to N <= 4".into(),
            ));
        }
        if measure
            .components()
            .iter()
            .any(|m| !matches!(m.family(), Family::Uniform))
        {
            return Err(SddError::Unsupported(
                "the Legendre oracle needs uniform inputs".into(),
            ));
        }
        let supports: Vec<(f64, f64)> = measure.components().iter().map(|m| m.support()).collect();

        let mut multi: Vec<Vec<usize>> = Vec::new();
        let mut idx = vec![0usize; dim];
        loop {
            let active = idx.iter().filter(|&&i| i > 0).count();
            if active <= order {
                multi.push(idx.clone());
            }
            let mut pos = dim;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                if idx[pos] < degree {
                    idx[pos] += 1;
                    idx[pos + 1..].fill(0);
                    break;
                }
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX || dim == 0 {
                break;
            }
        }

        let rules = measure
            .components()
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let extra: &[f64] = breakpoints.get(k).map(Vec::as_slice).unwrap_or(&[]);
                measure_quadrature(m, &merge_breakpoints([extra]), points_per_element)
            })
            .collect::<Result<Vec<_>>>()?;
        let phis: Vec<Vec<Vec<f64>>> = rules
            .iter()
            .zip(&supports)
            .map(|(r, &(a, b))| {
                r.nodes
                    .iter()
                    .map(|&x| legendre_orthonormal(degree, a, b, x))
                    .collect()
            })
            .collect();

        let mut sums = vec![0.0; multi.len()];
        let mut point = vec![0usize; dim];
        let mut x = vec![0.0; dim];
        loop {
            let mut w = 1.0;
            for k in 0..dim {
                x[k] = rules[k].nodes[point[k]];
                w *= rules[k].weights[point[k]];
            }
            let wy = w * y(&x);
            for (s, alpha) in sums.iter_mut().zip(&multi) {
                let mut prod = wy;
                for k in 0..dim {
                    prod *= phis[k][point[k]][alpha[k]];
                }
                *s += prod;
            }
            let mut k = dim;
            let mut done = true;
            while k > 0 {
                k -= 1;
                if point[k] + 1 < rules[k].len() {
                    point[k] += 1;
                    point[k + 1..].fill(0);
                    done = false;
                    break;
                }
            }
            if done {
                break;
            }
        }

        let y0 = sums[0];
        let terms = multi.into_iter().zip(sums).skip(1).collect();
        Ok(Self {
            degree,
            order,
            supports,
            y0,
            terms,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.supports.len()
    }

    pub fn mean(&self) -> f64 {
        self.y0
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let phis: Vec<Vec<f64>> = self
            .supports
            .iter()
            .zip(x)
            .map(|(&(a, b), &xi)| legendre_orthonormal(self.degree, a, b, xi))
            .collect();
        self.y0
            + self
                .terms
                .iter()
                .map(|(alpha, c)| c * alpha.iter().enumerate().map(|(k, &i)| phis[k][i]).product::<f64>())
                .sum::<f64>()
    }

    pub fn variance(&self) -> VarianceDecomposition {
        let mut groups: BTreeMap<SubsetIndex, f64> = BTreeMap::new();
        for (alpha, c) in &self.terms {
            let coords: Vec<usize> = (0..alpha.len()).filter(|&k| alpha[k] > 0).collect();
            let subset = SubsetIndex::new(coords).expect("nonconstant multi-index");
            *groups.entry(subset).or_insert(0.0) += c * c;
        }
        let by_subset: Vec<(SubsetIndex, f64)> = groups.into_iter().collect();
        VarianceDecomposition {
            total: by_subset.iter().map(|(_, v)| v).sum(),
            by_subset,
        }
    }
}

/// Per-subset comparison of two variance decompositions.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub total_spline: f64,
    pub total_reference: f64,
    /// `(subset, spline variance, reference variance)`.
    pub per_subset: Vec<(SubsetIndex, f64, f64)>,
    pub max_abs_discrepancy: f64,
    pub max_relative_discrepancy: f64,
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Compares a spline expansion built on polynomial (single-element) knots with
/// an independently fitted Legendre expansion of the same degree and order.
///
/// Individual coefficients may differ by a rotation within each subspace, so
/// the comparison is made on the subset variances.
pub fn equivalence_check(sdd: &SddExpansion, reference: &LegendreExpansion) -> Result<EquivalenceReport> {
    if sdd.dim() != reference.dim() || sdd.order() != reference.order() {
        return Err(SddError::arg(format!(
            "spline expansion (N = {}, S = {}) and reference (N = {}, S = {}) differ",
            sdd.dim(),
            sdd.order(),
            reference.dim(),
            reference.order()
        )));
    }
    for (k, b) in sdd.bases().iter().enumerate() {
        if b.knots().element_count() != 1 || b.knots().degree() != reference.degree() {
            return Err(SddError::arg(format!(
                "coordinate {} must use a single-element knot sequence of degree {}",
                k + 1,
                reference.degree()
            )));
        }
        if b.measure().support() != reference.supports[k]
            || !matches!(b.measure().family(), Family::Uniform)
        {
            return Err(SddError::arg(format!(
                "coordinate {} measure differs from the reference",
                k + 1
            )));
        }
    }
    let spline = sdd.variance();
    let poly = reference.variance();
    let mut per_subset = Vec::with_capacity(spline.by_subset.len());
    let mut max_abs: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    for (subset, v) in &spline.by_subset {
        let r = poly.get(subset).unwrap_or(0.0);
        max_abs = max_abs.max((v - r).abs());
        max_rel = max_rel.max(relative(*v, r));
        per_subset.push((subset.clone(), *v, r));
    }
    max_abs = max_abs.max((spline.total - poly.total).abs());
    max_rel = max_rel.max(relative(spline.total, poly.total));
    Ok(EquivalenceReport {
        total_spline: spline.total,
        total_reference: poly.total,
        per_subset,
        max_abs_discrepancy: max_abs,
        max_relative_discrepancy: max_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{BenchmarkFunction, Example1};
    use crate::measures::MeasureSpec;

    fn square(dim: usize) -> ProductMeasure {
        ProductMeasure::iid(MeasureSpec::uniform(-1.0, 1.0).unwrap(), dim).unwrap()
    }

    #[test]
    fn linear_reference_basis() {
        let setup = build_reference(ReferenceKind::Pce { degree: 1 }, &square(1)).unwrap();
        let b = &setup.bases()[0];
        assert_eq!(b.len(), 2);
        assert_eq!(b.knots().element_count(), 1);
        // ψ_1 = √3 x under U[-1,1]
        for &x in &[-1.0, -0.3, 0.6] {
            assert!((b.eval(x).unwrap()[1] - 3f64.sqrt() * x).abs() < 1e-13);
        }
    }

    #[test]
    fn reference_basis_spans_polynomials() {
        use nalgebra::{DMatrix, DVector};
        let p = 4;
        let setup = build_reference(ReferenceKind::Pdd { degree: p, order: 1 }, &square(1)).unwrap();
        let b = &setup.bases()[0];
        let xs: Vec<f64> = (0..40).map(|j| -0.99 + 1.98 * j as f64 / 39.0).collect();
        let psi = DMatrix::from_fn(40, p + 1, |r, c| b.eval(xs[r]).unwrap()[c]);
        let qr = psi.clone().qr();
        for power in 0..=p {
            let target = DVector::from_fn(40, |r, _| xs[r].powi(power as i32));
            let coef = qr.r().solve_upper_triangular(&(qr.q().transpose() * &target)).unwrap();
            assert!((&psi * coef - &target).amax() <= 1e-8);
        }
    }

    #[test]
    fn legendre_values_are_orthonormal() {
        let rule = measure_quadrature(&MeasureSpec::uniform(0.0, 3.0).unwrap(), &[], 12).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let g = rule.integrate(|x| {
                    let v = legendre_orthonormal(5, 0.0, 3.0, x);
                    v[i] * v[j]
                });
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn linear_output_univariate_variances_agree() {
        let f = |x: &[f64]| 0.7 * x[0] - 1.3 * x[1] + 0.2;
        let kind = ReferenceKind::Pdd { degree: 2, order: 1 };
        let sdd = build_reference(kind, &square(2)).unwrap().fit_quadrature(f, &[], 6).unwrap();
        let leg = LegendreExpansion::fit(f, &square(2), kind, &[], 6).unwrap();
        let report = equivalence_check(&sdd, &leg).unwrap();
        assert!(report.max_abs_discrepancy < 1e-9);
        assert!((report.total_spline - (0.49 + 1.69) / 3.0).abs() < 1e-12);
        assert!((leg.evaluate(&[0.5, 0.5]) - f(&[0.5, 0.5])).abs() < 1e-12);
    }

    #[test]
    fn constant_output_has_no_variance() {
        let kind = ReferenceKind::Pce { degree: 3 };
        let sdd = build_reference(kind, &square(2)).unwrap().fit_quadrature(|_| 4.0, &[], 6).unwrap();
        let leg = LegendreExpansion::fit(|_| 4.0, &square(2), kind, &[], 6).unwrap();
        let report = equivalence_check(&sdd, &leg).unwrap();
        assert!(report.total_spline.abs() < 1e-20);
        assert!(report.total_reference.abs() < 1e-20);
    }

    #[test]
    fn example1_quintic_totals_agree() {
        let f = Example1::default();
        let kind = ReferenceKind::Pdd { degree: 5, order: 2 };
        let bp = f.breakpoints();
        let sdd = build_reference(kind, &f.measure())
            .unwrap()
            .fit_quadrature(|x| f.eval(x), &bp, 20)
            .unwrap();
        let leg = LegendreExpansion::fit(|x| f.eval(x), &f.measure(), kind, &bp, 20).unwrap();
        let report = equivalence_check(&sdd, &leg).unwrap();
        assert!((report.total_spline - report.total_reference).abs() < 1e-8);
    }

    #[test]
    fn mismatched_configurations_are_rejected() {
        let f = |x: &[f64]| x[0];
        let sdd = build_reference(ReferenceKind::Pdd { degree: 2, order: 1 }, &square(2))
            .unwrap()
            .fit_quadrature(f, &[], 4)
            .unwrap();
        let other = LegendreExpansion::fit(f, &square(2), ReferenceKind::Pdd { degree: 3, order: 1 }, &[], 4).unwrap();
        assert!(equivalence_check(&sdd, &other).is_err());
        let other = LegendreExpansion::fit(f, &square(2), ReferenceKind::Pce { degree: 2 }, &[], 4).unwrap();
        assert!(equivalence_check(&sdd, &other).is_err());
        let knots = KnotSequence::open_uniform(-1.0, 1.0, 2, 2, &[]).unwrap();
        let b = OrthonormalBasis1D::whiten(knots, MeasureSpec::uniform(-1.0, 1.0).unwrap()).unwrap();
        let spline = ExpansionSetup::new(vec![b.clone(), b], 1).unwrap().fit_quadrature(f, &[], 4).unwrap();
        let same = LegendreExpansion::fit(f, &square(2), ReferenceKind::Pdd { degree: 2, order: 1 }, &[], 4).unwrap();
        assert!(equivalence_check(&spline, &same).is_err());
        assert!(build_reference(ReferenceKind::Pce { degree: 0 }, &square(2)).is_err());
    }

    #[test]
    fn legendre_rejects_non_uniform() {
        let m = ProductMeasure::new(vec![MeasureSpec::beta(-1.0, 1.0, 2.0, 2.0).unwrap()]).unwrap();
        assert!(LegendreExpansion::fit(|_| 0.0, &m, ReferenceKind::Pce { degree: 2 }, &[], 4).is_err());
    }
}
