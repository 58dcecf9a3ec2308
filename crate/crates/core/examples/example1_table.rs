//! Relative variance errors for the two-input nonsmooth example.
//!
//! Polynomial chaos needs degree 20 to reach what a linear spline on 20
//! elements achieves; a doubled knot at the kink does better still.

use sdd::bench::{exact_variance_example1, BenchmarkFunction, Example1};
use sdd::cli::{table_csv, table_example1};

fn main() -> sdd::Result<()> {
    let f = Example1::default();
    println!("exact mean {:.12}", f.exact_mean().unwrap());
    println!("exact variance {:.12}\n", exact_variance_example1());
    let rows = table_example1()?;
    print!("{}", table_csv(&rows));
    Ok(())
}
