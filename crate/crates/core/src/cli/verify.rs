//! Seeded invariant checks runnable from the binary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bspline::eval_all;
use crate::decomposition::{sample_inputs, term_count, ExpansionSetup, RegressionOptions, SddExpansion, SurrogateSample};
use crate::knots::KnotSequence;
use crate::measures::{measure_quadrature, MeasureSpec};
use crate::orthobasis::OrthonormalBasis1D;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn sample_measures() -> [MeasureSpec; 3] {
    [
        MeasureSpec::uniform(-1.0, 1.0).unwrap(),
        MeasureSpec::truncated_gaussian(-1.0, 1.0, -0.5, 0.5).unwrap(),
        MeasureSpec::beta(-1.0, 1.0, 3.0, 2.0).unwrap(),
    ]
}

pub fn verify() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    vec![
        term_counts(&mut rng),
        partition_of_unity(&mut rng),
        inverse_cdf(&mut rng),
        orthonormality(),
        moments_of_in_span_targets(&mut rng),
        json_round_trip(),
        regression_determinism(),
    ]
}

fn term_counts(rng: &mut ChaCha8Rng) -> Check {
    let headline = [
        term_count(&[5; 15], 1).map(|c| c + 1).ok(),
        term_count(&[5; 15], 2).map(|c| c + 1).ok(),
    ];
    let mut ok = headline == [Some(61), Some(1741)];
    for _ in 0..200 {
        let dim = rng.random_range(1..=4);
        let counts: Vec<usize> = (0..dim).map(|_| rng.random_range(2..=6)).collect();
        let full = term_count(&counts, dim).ok().map(|c| c + 1);
        ok &= full == Some(counts.iter().product::<usize>() as u128);
    }
    check("term counts", ok, "61 and 1741 for N = 15, n = 5; completeness on 200 random cases".into())
}

fn partition_of_unity(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let p = rng.random_range(0..=5);
        let e = rng.random_range(1..=10);
        let k = KnotSequence::open_uniform(-1.0, 2.0, p, e, &[]).unwrap();
        for _ in 0..50 {
            let x = rng.random_range(-1.0..=2.0);
            let s: f64 = eval_all(&k, x).unwrap().iter().sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    check("partition of unity", worst <= 1e-12, format!("max deviation {worst:.2e}"))
}

fn inverse_cdf(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for m in sample_measures() {
        for _ in 0..500 {
            let u: f64 = rng.random();
            worst = worst.max((m.cdf(m.sample(u)) - u).abs());
        }
    }
    check("inverse CDF", worst <= 1e-10, format!("max |F(F^-1(u)) - u| {worst:.2e}"))
}

fn orthonormality() -> Check {
    let mut worst: f64 = 0.0;
    for m in sample_measures() {
        let k = KnotSequence::open_uniform(-1.0, 1.0, 2, 4, &[]).unwrap();
        let basis = OrthonormalBasis1D::whiten(k, m.clone()).unwrap();
        let breaks: Vec<f64> = (1..40).map(|j| -1.0 + j as f64 / 20.0).collect();
        let rule = measure_quadrature(&m, &breaks, 30).unwrap();
        let n = basis.len();
        let mut gram = vec![0.0; n * n];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let v = basis.eval(x).unwrap();
            for i in 0..n {
                for j in 0..n {
                    gram[i * n + j] += w * v[i] * v[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[i * n + j] - want).abs());
            }
        }
    }
    check("orthonormality", worst <= 1e-8, format!("max |E[psi psi^T] - I| {worst:.2e}"))
}

fn small_setup() -> ExpansionSetup {
    let [u, g, b] = sample_measures();
    let bases = [(u, 1, 3), (g, 2, 2), (b, 2, 3)]
        .into_iter()
        .map(|(m, p, e)| {
            let k = KnotSequence::open_uniform(-1.0, 1.0, p, e, &[]).unwrap();
            OrthonormalBasis1D::whiten(k, m).unwrap()
        })
        .collect();
    ExpansionSetup::new(bases, 2).unwrap()
}

fn moments_of_in_span_targets(rng: &mut ChaCha8Rng) -> Check {
    let setup = small_setup();
    let mut worst_mean: f64 = 0.0;
    let mut worst_var: f64 = 0.0;
    for _ in 0..5 {
        let coeffs: Vec<f64> = (0..setup.terms().len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y0 = rng.random_range(-2.0..2.0);
        let target = setup.with_coefficients(y0, coeffs).unwrap();
        let fit = setup
            .fit_quadrature(|x| target.evaluate(x).unwrap(), &[], 24)
            .unwrap();
        worst_mean = worst_mean.max((fit.mean() - y0).abs());
        worst_var = worst_var.max((fit.variance().total - target.variance().total).abs());
    }
    check(
        "mean and variance of in-span targets",
        worst_mean <= 1e-10 && worst_var <= 1e-8,
        format!("mean error {worst_mean:.2e}, variance error {worst_var:.2e}"),
    )
}

fn json_round_trip() -> Check {
    let setup = small_setup();
    let coeffs: Vec<f64> = (0..setup.terms().len()).map(|i| (i as f64).sin()).collect();
    let e = setup.with_coefficients(0.3, coeffs).unwrap();
    let text = e.to_json();
    let ok = SddExpansion::from_json(&text).is_ok_and(|b| b.to_json() == text && b.coefficients() == e.coefficients());
    check("expansion JSON round trip", ok, "byte-identical re-serialization".into())
}

fn regression_determinism() -> Check {
    let setup = small_setup();
    let fit = || {
        let data: Vec<SurrogateSample> = sample_inputs(setup.measure(), 600, 11)
            .into_iter()
            .map(|x| {
                let y = (x[0] + x[1] * x[2]).cos();
                SurrogateSample { x, y }
            })
            .collect();
        setup.fit_regression(&data, RegressionOptions::default()).map(|e| e.to_json())
    };
    let ok = matches!((fit(), fit()), (Ok(a), Ok(b)) if a == b);
    check("regression determinism", ok, "two seeded fits serialize identically".into())
}
