use std::fmt::Write as _;

use crate::bench::{relative_variance_error, BenchmarkFunction, Example1};
use crate::decomposition::{sci, ExpansionSetup};
use crate::error::Result;
use crate::knots::KnotSequence;
use crate::orthobasis::OrthonormalBasis1D;
use crate::reference::{build_reference, ReferenceKind};

/// Quadrature escalation for the table fits.
const START_POINTS: usize = 8;
const MAX_POINTS: usize = 64;
const TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub method: &'static str,
    pub p: usize,
    /// `bernstein` (one element), `simple` or `repeated-center`.
    pub knots: &'static str,
    /// Univariate basis size per coordinate.
    pub basis_count: usize,
    pub relative_error: f64,
}

/// Tensor PCE of degree 2 and 20, and bivariate SDD with 20 elements of degree
/// 1 and 2 (the latter with simple and with a doubled central knot), each
/// fitted by tensor quadrature and compared with the exact variance.
pub fn table_example1() -> Result<Vec<TableRow>> {
    let f = Example1::default();
    let exact = f.exact_variance().expect("closed form");
    let breaks = f.breakpoints();
    let measure = f.measure();
    let fit = |setup: ExpansionSetup| -> Result<f64> {
        let e = setup.fit_quadrature_converged(|x| f.eval(x), &breaks, START_POINTS, TOLERANCE, MAX_POINTS)?;
        relative_variance_error(e.variance().total, exact)
    };

    let mut rows = Vec::new();
    for p in [2, 20] {
        let setup = build_reference(ReferenceKind::Pce { degree: p }, &measure)?;
        rows.push(TableRow {
            method: "pce",
            p,
            knots: "bernstein",
            basis_count: p + 1,
            relative_error: fit(setup)?,
        });
    }
    let spline = |p: usize, repeated: bool| -> Result<ExpansionSetup> {
        let bases = measure
            .components()
            .iter()
            .map(|m| {
                let knots = if repeated {
                    KnotSequence::open_uniform_repeated_center(m.lower(), m.upper(), p, 20)?
                } else {
                    KnotSequence::open_uniform(m.lower(), m.upper(), p, 20, &[])?
                };
                OrthonormalBasis1D::whiten(knots, m.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        ExpansionSetup::new(bases, 2)
    };
    for (p, repeated) in [(1, false), (2, false), (2, true)] {
        let setup = spline(p, repeated)?;
        rows.push(TableRow {
            method: "sdd",
            p,
            knots: if repeated { "repeated-center" } else { "simple" },
            basis_count: setup.bases()[0].len(),
            relative_error: fit(setup)?,
        });
    }
    Ok(rows)
}

pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("method,p,knots,basis_count,relative_error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.method,
            r.p,
            r.knots,
            r.basis_count,
            sci(r.relative_error)
        );
    }
    out
}
