//! Knot sequences and B-spline evaluation.
//!
//! Builds the quadratic four-element sequence on [-1, 1], prints a few basis
//! values, and shows how repeating the central knot lowers continuity there.

use sdd::bspline::{eval_all, eval_nonzero, support};
use sdd::KnotSequence;

fn main() -> sdd::Result<()> {
    let knots = KnotSequence::open_uniform(-1.0, 1.0, 2, 4, &[])?;
    println!("knots {:?}", knots.knots());
    println!("{} basis functions, mesh size {}", knots.basis_count(), knots.mesh_size());

    for x in [-1.0, -0.75, 0.0, 0.3, 1.0] {
        let values = eval_all(&knots, x)?;
        let sum: f64 = values.iter().sum();
        let shown: Vec<String> = values.iter().map(|v| format!("{v:.4}")).collect();
        println!("x = {x:5.2}: [{}]  sum = {sum:.15}", shown.join(", "));
    }

    // Only p + 1 functions are nonzero on a span.
    let (first, local) = eval_nonzero(&knots, 0.3)?;
    println!("nonzero at 0.3: B_{}..B_{} = {local:?}", first + 1, first + local.len());
    for i in 0..knots.basis_count() {
        let (lo, hi) = support(&knots, i);
        println!("supp B_{} = [{lo}, {hi}]", i + 1);
    }

    let doubled = KnotSequence::open_uniform_repeated_center(-1.0, 1.0, 2, 4)?;
    println!("\nrepeated central knot: {:?}", doubled.knots());
    let h = 1e-7;
    for k in [&knots, &doubled] {
        // One-sided slopes of the middle basis function at 0.
        let mid = k.basis_count() / 2;
        let left = (eval_all(k, 0.0)?[mid] - eval_all(k, -h)?[mid]) / h;
        let right = (eval_all(k, h)?[mid] - eval_all(k, 0.0)?[mid]) / h;
        println!("B_{} slopes at 0: left {left:.4}, right {right:.4}", mid + 1);
    }
    Ok(())
}
