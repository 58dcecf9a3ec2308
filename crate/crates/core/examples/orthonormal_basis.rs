//! Measure-consistent orthonormal splines for three input laws.
//!
//! The same knots produce a different orthonormal basis for each density;
//! the Gram matrix under that density is the identity.

use sdd::measures::measure_quadrature;
use sdd::{KnotSequence, MeasureSpec, OrthonormalBasis1D};

fn main() -> sdd::Result<()> {
    let laws = [
        ("uniform", MeasureSpec::uniform(-1.0, 1.0)?),
        ("truncated Gaussian", MeasureSpec::truncated_gaussian(-1.0, 1.0, -0.5, 0.5)?),
        ("Beta(3, 2)", MeasureSpec::beta(-1.0, 1.0, 3.0, 2.0)?),
    ];
    let knots = KnotSequence::open_uniform(-1.0, 1.0, 2, 4, &[])?;
    for (name, measure) in laws {
        let basis = OrthonormalBasis1D::whiten(knots.clone(), measure.clone())?;
        let rule = measure_quadrature(&measure, knots.interior_distinct(), 12)?;
        let n = basis.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let g = rule.integrate(|x| {
                    let v = basis.eval(x).unwrap();
                    v[i] * v[j]
                });
                worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        let at_zero: Vec<String> = basis.eval(0.0)?.iter().map(|v| format!("{v:+.4}")).collect();
        println!("{name:>20}: max|G - I| = {worst:.1e}, psi(0) = [{}]", at_zero.join(", "));
    }
    Ok(())
}
