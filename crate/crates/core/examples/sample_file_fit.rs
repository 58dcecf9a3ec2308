//! Fitting a surrogate to precomputed simulator outputs.
//!
//! Writes a CSV of (x1, x2, x3, y) rows, then runs the same configuration the
//! `sdd run` command takes, pointing it at that file.

use std::fmt::Write as _;

use sdd::cli::{run, RunConfig};
use sdd::decomposition::sample_inputs;
use sdd::{MeasureSpec, ProductMeasure};

fn simulator(x: &[f64]) -> f64 {
    (x[0] - 0.2).abs() + x[1] * x[2] + 0.1 * x[2].powi(3)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("sdd_sample_file_fit");
    std::fs::create_dir_all(&dir)?;
    let measure = ProductMeasure::iid(MeasureSpec::uniform(-1.0, 1.0)?, 3)?;
    let mut csv = String::from("x1,x2,x3,y\n");
    for x in sample_inputs(&measure, 1500, 4) {
        writeln!(csv, "{},{},{},{}", x[0], x[1], x[2], simulator(&x))?;
    }
    let samples = dir.join("samples.csv");
    std::fs::write(&samples, csv)?;

    let config = RunConfig::from_json(&format!(
        r#"{{
            "samples": {samples:?},
            "coordinates": [{{"measure": {{"family": "uniform", "support": [-1, 1]}},
                              "knots": {{"p": 1, "elements": 5}}}}],
            "method": "sdd",
            "S": 2,
            "fitting": {{"regression": {{}}}}
        }}"#
    ))?;
    let report = run(config, &dir.join("out"))?;
    println!("mean {:.5}, variance {:.5}", report.expansion.mean(), report.expansion.variance().total);
    for path in &report.written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
