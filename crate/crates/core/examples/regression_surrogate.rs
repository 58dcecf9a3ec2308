//! Least-squares fit of a five-input function with kinks.
//!
//! Quadrature on a 5-D tensor grid is possible but wasteful; random samples
//! and a QR solve give the same statistics to sampling accuracy.

use sdd::bench::{BenchmarkFunction, Synthetic5d};
use sdd::decomposition::{sample_function, sample_inputs};
use sdd::{ExpansionSetup, KnotSequence, OrthonormalBasis1D, RegressionOptions, SurrogateSample};

fn main() -> sdd::Result<()> {
    let f = Synthetic5d;
    let measure = f.measure();
    let bases = measure
        .components()
        .iter()
        .map(|m| {
            let knots = KnotSequence::open_uniform(m.lower(), m.upper(), 1, 6, &[])?;
            OrthonormalBasis1D::whiten(knots, m.clone())
        })
        .collect::<sdd::Result<Vec<_>>>()?;
    let setup = ExpansionSetup::new(bases, 2)?;
    println!("{} coefficients", setup.coefficient_count());

    let samples: Vec<SurrogateSample> = sample_inputs(&measure, 4000, 1)
        .into_iter()
        .map(|x| {
            let y = f.eval(&x);
            SurrogateSample { x, y }
        })
        .collect();
    let fit = setup.fit_regression(&samples, RegressionOptions::default())?;
    println!("condition estimate {:.2e}", fit.diagnostics().condition_estimate.unwrap_or(f64::NAN));

    let mc = sample_function(|x| f.eval(x), &measure, 400_000, 2);
    println!("mean      surrogate {:.5}  Monte Carlo {:.5} ± {:.5}", fit.mean(), mc.mean(), mc.standard_error());
    println!(
        "variance  surrogate {:.5}  Monte Carlo {:.5} ± {:.5}",
        fit.variance().total,
        mc.variance(),
        mc.variance_standard_error()
    );
    let v = fit.variance();
    println!("\nlargest variance contributions:");
    let mut parts = v.by_subset.clone();
    parts.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (subset, part) in parts.iter().take(6) {
        println!("  u = {{{subset}}}: {:.4}", part / v.total);
    }
    Ok(())
}
