//! Spline dimensional decomposition (SDD) for uncertainty quantification.
//!
//! Outputs `y(X)` of independent, bounded random inputs are expanded in
//! measure-consistent orthonormal B-spline bases, grouped dimensionwise by
//! the subsets of inputs they depend on and truncated at interaction order
//! `S`. Means and variances follow directly from the coefficients; output
//! distributions come from cheap Monte Carlo sampling of the surrogate.
//!
//! The pipeline, bottom-up:
//!
//! * [`measures`]: input distributions, inverse-CDF sampling, quadrature.
//! * [`knots`] and [`bspline`]: (p+1)-open knot sequences and Cox–de Boor evaluation.
//! * [`orthobasis`]: whitening of the auxiliary spline vector into an orthonormal basis.
//! * [`decomposition`]: term enumeration, fitting by quadrature or regression, statistics.
//! * [`reference`]: polynomial special cases (PDD, PCE) and a Legendre oracle.
//! * [`bench`]: benchmark functions with analytic statistics.
//! * [`cli`]: the config-driven runner behind the `sdd` binary.

pub mod bench;
pub mod bspline;
pub mod cli;
pub mod decomposition;
pub mod error;
pub mod knots;
pub mod measures;
pub mod orthobasis;
pub mod reference;

pub use decomposition::{
    EmpiricalDistribution, ExpansionSetup, FitDiagnostics, RegressionOptions, ReducedMultiIndex,
    SddExpansion, SubsetIndex, SurrogateSample, Term, VarianceDecomposition,
};
pub use error::{Result, SddError};
pub use knots::KnotSequence;
pub use measures::{Family, MeasureSpec, ProductMeasure, QuadratureRule};
pub use orthobasis::OrthonormalBasis1D;
