//! Without interior knots the spline expansion is a polynomial one.
//!
//! Compares the spline pipeline on single-element knots against expansions
//! assembled directly from Legendre polynomials.

use sdd::bench::{BenchmarkFunction, Example1};
use sdd::reference::{build_reference, equivalence_check, LegendreExpansion, ReferenceKind};

fn main() -> sdd::Result<()> {
    let f = Example1::default();
    let measure = f.measure();
    let breaks = f.breakpoints();
    for kind in [
        ReferenceKind::Pdd { degree: 3, order: 1 },
        ReferenceKind::Pce { degree: 3 },
        ReferenceKind::Pdd { degree: 5, order: 2 },
    ] {
        let spline = build_reference(kind, &measure)?.fit_quadrature(|x| f.eval(x), &breaks, 20)?;
        let legendre = LegendreExpansion::fit(|x| f.eval(x), &measure, kind, &breaks, 20)?;
        let report = equivalence_check(&spline, &legendre)?;
        println!(
            "{kind:?}: variance {:.12} vs {:.12}, max discrepancy {:.1e}",
            report.total_spline, report.total_reference, report.max_abs_discrepancy
        );
        for (subset, a, b) in &report.per_subset {
            println!("    u = {{{subset}}}: {a:.12} / {b:.12}");
        }
    }
    Ok(())
}
