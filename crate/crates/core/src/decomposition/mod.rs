//! Dimensionwise spline expansions truncated at interaction order `S`.
//!
//! An expansion is a constant `y0` plus one coefficient per retained term. A
//! term pairs a nonempty subset `u` of input coordinates (at most `S` of them)
//! with a reduced multi-index that picks one non-constant orthonormal element
//! per coordinate in `u`; its basis function is the product of those elements.
//!
//! Coordinates are zero-based in the API. Basis indices are zero-based too,
//! with index 0 the constant element, so reduced indices start at 1. The JSON
//! and CSV artifacts use one-based numbering for both.

mod format;
mod quadrature;
mod regression;
mod sampling;

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Result, SddError};
use crate::measures::ProductMeasure;
use crate::orthobasis::OrthonormalBasis1D;

pub use format::{coefficients_csv, variance_csv, ExpansionDocument, FORMAT_VERSION};
pub(crate) use format::sci;
pub use quadrature::MAX_QUADRATURE_DIM;
pub use regression::{RegressionOptions, CONDITION_WARNING};
pub use sampling::{sample_function, sample_inputs, EmpiricalDistribution, STREAM_BLOCK};

/// Strictly increasing, nonempty list of zero-based coordinate indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetIndex(Vec<usize>);

impl SubsetIndex {
    pub fn new(coords: Vec<usize>) -> Result<Self> {
        if coords.is_empty() {
            return Err(SddError::arg("subset must be nonempty"));
        }
        if coords.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SddError::arg(format!(
                "subset {coords:?} must be strictly increasing"
            )));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Ord for SubsetIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for SubsetIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SubsetIndex {
    /// One-based, space separated.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| (k + 1).to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Basis indices, one per coordinate of the owning subset, each at least 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReducedMultiIndex(Vec<usize>);

impl ReducedMultiIndex {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.contains(&0) {
            return Err(SddError::arg(
                "reduced multi-indices exclude the constant element (index 0)",
            ));
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for ReducedMultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| (i + 1).to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// One retained basis function of an expansion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub subset: SubsetIndex,
    pub index: ReducedMultiIndex,
}

impl Term {
    pub fn new(subset: SubsetIndex, index: ReducedMultiIndex) -> Result<Self> {
        if subset.len() != index.0.len() {
            return Err(SddError::arg(format!(
                "subset has {} coordinates but multi-index has {}",
                subset.len(),
                index.0.len()
            )));
        }
        Ok(Self { subset, index })
    }

    /// Single-coordinate term.
    pub fn univariate(coord: usize, index: usize) -> Result<Self> {
        Self::new(
            SubsetIndex::new(vec![coord])?,
            ReducedMultiIndex::new(vec![index])?,
        )
    }

    /// `(coordinate, basis index)` pairs.
    pub fn factors(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.subset.0.iter().copied().zip(self.index.0.iter().copied())
    }
}

fn check_order(counts: &[usize], order: usize) -> Result<()> {
    let dim = counts.len();
    if dim == 0 {
        return Err(SddError::arg("at least one coordinate is required"));
    }
    if order == 0 || order > dim {
        return Err(SddError::arg(format!(
            "truncation order S = {order} must satisfy 1 <= S <= N = {dim}"
        )));
    }
    if let Some((k, &n)) = counts.iter().enumerate().find(|&(_, &n)| n < 2) {
        return Err(SddError::arg(format!(
            "coordinate {} has {n} basis functions; at least 2 are required",
            k + 1
        )));
    }
    Ok(())
}

/// All terms with `1 <= |u| <= order`, ordered by `|u|`, then `u`, then the
/// multi-index (last coordinate varying fastest).
pub fn enumerate_terms(counts: &[usize], order: usize) -> Result<Vec<Term>> {
    check_order(counts, order)?;
    let dim = counts.len();
    let mut terms = Vec::new();
    for size in 1..=order {
        let mut subset: Vec<usize> = (0..size).collect();
        loop {
            let mut index: Vec<usize> = vec![1; size];
            loop {
                terms.push(Term {
                    subset: SubsetIndex(subset.clone()),
                    index: ReducedMultiIndex(index.clone()),
                });
                // odometer over [1, n_k - 1], last position fastest
                let mut advanced = false;
                for pos in (0..size).rev() {
                    if index[pos] + 1 < counts[subset[pos]] {
                        index[pos] += 1;
                        index[pos + 1..].fill(1);
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    break;
                }
            }
            if !next_combination(&mut subset, dim) {
                break;
            }
        }
    }
    Ok(terms)
}

fn next_combination(c: &mut [usize], dim: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < dim - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Number of non-constant terms for truncation order `order`, without enumerating them.
pub fn term_count(counts: &[usize], order: usize) -> Result<u128> {
    check_order(counts, order)?;
    // elementary symmetric sums of (n_k - 1)
    let mut e = vec![0u128; order + 1];
    e[0] = 1;
    for &n in counts {
        let f = (n - 1) as u128;
        for j in (1..=order).rev() {
            e[j] += e[j - 1] * f;
        }
    }
    Ok(e[1..].iter().sum())
}

/// How the coefficients were obtained, plus numerical health indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct FitDiagnostics {
    pub method: FitMethod,
    /// Ratio of extreme singular values of the regression design matrix.
    pub condition_estimate: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitMethod {
    Quadrature { points_per_element: usize },
    Regression { samples: usize, ridge: Option<f64> },
    /// Coefficients supplied directly or loaded from a file.
    Given,
}

/// Total variance and its split over subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceDecomposition {
    pub total: f64,
    pub by_subset: Vec<(SubsetIndex, f64)>,
}

impl VarianceDecomposition {
    pub fn get(&self, subset: &SubsetIndex) -> Option<f64> {
        self.by_subset
            .iter()
            .find(|(s, _)| s == subset)
            .map(|&(_, v)| v)
    }
}

/// Per-coordinate bases and a truncation order: everything needed to fit.
#[derive(Debug, Clone)]
pub struct ExpansionSetup {
    bases: Vec<OrthonormalBasis1D>,
    order: usize,
    terms: Vec<Term>,
    measure: ProductMeasure,
}

impl ExpansionSetup {
    pub fn new(bases: Vec<OrthonormalBasis1D>, order: usize) -> Result<Self> {
        let counts: Vec<usize> = bases.iter().map(OrthonormalBasis1D::len).collect();
        let terms = enumerate_terms(&counts, order)?;
        let measure = ProductMeasure::new(bases.iter().map(|b| b.measure().clone()).collect())?;
        Ok(Self {
            bases,
            order,
            terms,
            measure,
        })
    }

    pub fn bases(&self) -> &[OrthonormalBasis1D] {
        &self.bases
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.bases.len()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn measure(&self) -> &ProductMeasure {
        &self.measure
    }

    /// Number of coefficients including the constant.
    pub fn coefficient_count(&self) -> usize {
        self.terms.len() + 1
    }

    /// Wraps given coefficients (constant first, then one per term) into an expansion.
    pub fn with_coefficients(&self, y0: f64, coefficients: Vec<f64>) -> Result<SddExpansion> {
        if coefficients.len() != self.terms.len() {
            return Err(SddError::arg(format!(
                "expected {} coefficients, got {}",
                self.terms.len(),
                coefficients.len()
            )));
        }
        Ok(SddExpansion {
            setup: self.clone(),
            y0,
            coefficients,
            diagnostics: FitDiagnostics {
                method: FitMethod::Given,
                condition_estimate: None,
                warnings: Vec::new(),
            },
        })
    }
}

/// A fitted, truncated expansion.
#[derive(Debug, Clone)]
pub struct SddExpansion {
    setup: ExpansionSetup,
    y0: f64,
    coefficients: Vec<f64>,
    diagnostics: FitDiagnostics,
}

impl SddExpansion {
    pub fn setup(&self) -> &ExpansionSetup {
        &self.setup
    }

    pub fn bases(&self) -> &[OrthonormalBasis1D] {
        &self.setup.bases
    }

    pub fn order(&self) -> usize {
        self.setup.order
    }

    pub fn dim(&self) -> usize {
        self.setup.dim()
    }

    pub fn terms(&self) -> &[Term] {
        &self.setup.terms
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn constant(&self) -> f64 {
        self.y0
    }

    pub fn diagnostics(&self) -> &FitDiagnostics {
        &self.diagnostics
    }

    pub fn measure(&self) -> &ProductMeasure {
        &self.setup.measure
    }

    pub fn coefficient(&self, term: &Term) -> Option<f64> {
        self.terms()
            .binary_search(term)
            .ok()
            .map(|i| self.coefficients[i])
    }

    /// Iterates `(term, coefficient)` in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&Term, f64)> {
        self.terms().iter().zip(self.coefficients.iter().copied())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(SddError::arg(format!(
                "point has {} coordinates, expansion has {}",
                x.len(),
                self.dim()
            )));
        }
        for (b, &xi) in self.bases().iter().zip(x) {
            b.measure().check_domain(xi)?;
        }
        Ok(())
    }

    /// Product of the univariate orthonormal elements selected by `term`.
    pub fn eval_multivariate(&self, term: &Term, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let mut value = 1.0;
        for (k, i) in term.factors() {
            let basis = self
                .bases()
                .get(k)
                .ok_or_else(|| SddError::arg(format!("coordinate {k} out of range")))?;
            let psi = basis.eval(x[k])?;
            value *= *psi.get(i).ok_or_else(|| {
                SddError::arg(format!("basis index {i} out of range for coordinate {k}"))
            })?;
        }
        Ok(value)
    }

    /// `y0 + Σ C_t Ψ_t(x)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let mut scratch = EvalScratch::new(self.bases());
        Ok(self.evaluate_with(x, &mut scratch))
    }

    pub(crate) fn evaluate_with(&self, x: &[f64], scratch: &mut EvalScratch) -> f64 {
        scratch.load(self.bases(), x);
        let mut sum = self.y0;
        for (term, c) in self.iter() {
            sum += c * scratch.product(term);
        }
        sum
    }

    /// Exact mean of the expansion, `y0`.
    pub fn mean(&self) -> f64 {
        self.y0
    }

    /// Sum of squared coefficients, also split by subset.
    pub fn variance(&self) -> VarianceDecomposition {
        let mut by_subset: Vec<(SubsetIndex, f64)> = Vec::new();
        for (term, c) in self.iter() {
            match by_subset.last_mut() {
                Some((s, v)) if *s == term.subset => *v += c * c,
                _ => by_subset.push((term.subset.clone(), c * c)),
            }
        }
        let total = by_subset.iter().map(|(_, v)| v).sum();
        VarianceDecomposition { total, by_subset }
    }

    /// Seeded Monte Carlo sample of the surrogate's output distribution.
    pub fn sample_surrogate(&self, count: usize, seed: u64) -> EmpiricalDistribution {
        sampling::sample_surrogate(self, count, seed)
    }
}

/// Per-coordinate orthonormal values at one point, reused across terms.
pub(crate) struct EvalScratch {
    values: Vec<Vec<f64>>,
}

impl EvalScratch {
    pub(crate) fn new(bases: &[OrthonormalBasis1D]) -> Self {
        Self {
            values: bases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub(crate) fn load(&mut self, bases: &[OrthonormalBasis1D], x: &[f64]) {
        for ((b, out), &xi) in bases.iter().zip(&mut self.values).zip(x) {
            b.eval_into(xi, out);
        }
    }

    pub(crate) fn product(&self, term: &Term) -> f64 {
        term.factors().map(|(k, i)| self.values[k][i]).product()
    }
}

/// Paired input and output used for regression fits.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateSample {
    pub x: Vec<f64>,
    pub y: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knots::KnotSequence;
    use crate::measures::MeasureSpec;
    use proptest::prelude::*;

    #[test]
    fn headline_term_counts() {
        let counts = vec![5; 15];
        assert_eq!(term_count(&counts, 1).unwrap() + 1, 61);
        assert_eq!(term_count(&counts, 2).unwrap() + 1, 1741);
        assert_eq!(enumerate_terms(&counts, 1).unwrap().len(), 60);
        assert_eq!(enumerate_terms(&counts, 2).unwrap().len(), 1740);
    }

    #[test]
    fn small_enumeration_order() {
        let terms = enumerate_terms(&[3, 3], 2).unwrap();
        let shown: Vec<String> = terms
            .iter()
            .map(|t| format!("{{{}}}:{}", t.subset, t.index))
            .collect();
        assert_eq!(
            shown,
            [
                "{1}:2", "{1}:3", "{2}:2", "{2}:3", "{1 2}:2 2", "{1 2}:2 3", "{1 2}:3 2",
                "{1 2}:3 3"
            ]
        );
        let mut sorted = terms.clone();
        sorted.sort();
        assert_eq!(sorted, terms);
    }

    #[test]
    fn invalid_orders_are_rejected() {
        assert!(enumerate_terms(&[3, 3], 3).is_err());
        assert!(enumerate_terms(&[3, 3], 0).is_err());
        assert!(enumerate_terms(&[3, 1], 1).is_err());
        assert!(term_count(&[], 1).is_err());
    }

    #[test]
    fn term_constructors_validate() {
        assert!(SubsetIndex::new(vec![1, 0]).is_err());
        assert!(SubsetIndex::new(vec![]).is_err());
        assert!(ReducedMultiIndex::new(vec![0]).is_err());
        assert!(Term::new(
            SubsetIndex::new(vec![0, 1]).unwrap(),
            ReducedMultiIndex::new(vec![1]).unwrap()
        )
        .is_err());
    }

    fn small_setup() -> ExpansionSetup {
        let m = MeasureSpec::uniform(-1.0, 1.0).unwrap();
        let k = KnotSequence::open_uniform(-1.0, 1.0, 1, 2, &[]).unwrap();
        let b = OrthonormalBasis1D::whiten(k, m).unwrap();
        ExpansionSetup::new(vec![b.clone(), b], 2).unwrap()
    }

    #[test]
    fn constant_only_expansion() {
        let setup = small_setup();
        let e = setup
            .with_coefficients(4.5, vec![0.0; setup.terms().len()])
            .unwrap();
        assert_eq!(e.evaluate(&[0.3, -0.7]).unwrap(), 4.5);
        assert_eq!(e.mean(), 4.5);
        assert_eq!(e.variance().total, 0.0);
    }

    #[test]
    fn single_term_expansion() {
        let setup = small_setup();
        let target = Term::new(
            SubsetIndex::new(vec![0, 1]).unwrap(),
            ReducedMultiIndex::new(vec![2, 1]).unwrap(),
        )
        .unwrap();
        let coeffs: Vec<f64> = setup
            .terms()
            .iter()
            .map(|t| if *t == target { 0.3 } else { 0.0 })
            .collect();
        let e = setup.with_coefficients(1.0, coeffs).unwrap();
        let x = [0.25, -0.4];
        let psi = e.eval_multivariate(&target, &x).unwrap();
        assert!((e.evaluate(&x).unwrap() - (1.0 + 0.3 * psi)).abs() < 1e-15);
        assert!((e.variance().total - 0.09).abs() < 1e-15);
        assert_eq!(e.coefficient(&target), Some(0.3));
        let univariate = Term::univariate(1, 2).unwrap();
        let direct = e.bases()[1].eval(x[1]).unwrap()[2];
        assert_eq!(e.eval_multivariate(&univariate, &x).unwrap(), direct);
    }

    #[test]
    fn evaluation_outside_box_fails() {
        let setup = small_setup();
        let e = setup
            .with_coefficients(0.0, vec![0.0; setup.terms().len()])
            .unwrap();
        assert!(matches!(e.evaluate(&[1.5, 0.0]), Err(SddError::Domain { .. })));
        assert!(e.evaluate(&[0.0]).is_err());
    }

    proptest! {
        #[test]
        fn completeness_identity(counts in proptest::collection::vec(2usize..=6, 1..=4)) {
            let dim = counts.len();
            let full: u128 = counts.iter().map(|&n| n as u128).product();
            prop_assert_eq!(term_count(&counts, dim).unwrap() + 1, full);
            prop_assert_eq!(enumerate_terms(&counts, dim).unwrap().len() as u128 + 1, full);
        }

        #[test]
        fn enumeration_matches_count(counts in proptest::collection::vec(2usize..=5, 1..=5), s in 1usize..=5) {
            prop_assume!(s <= counts.len());
            let terms = enumerate_terms(&counts, s).unwrap();
            prop_assert_eq!(terms.len() as u128, term_count(&counts, s).unwrap());
            prop_assert!(terms.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
