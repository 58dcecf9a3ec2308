//! Benchmark output functions with declared kinks and, where known, exact statistics.

use crate::error::{Result, SddError};
use crate::measures::{MeasureSpec, ProductMeasure};

/// An output function on a product measure, with the loci where it is not smooth.
pub trait BenchmarkFunction: Sync {
    fn name(&self) -> &str;
    fn measure(&self) -> ProductMeasure;
    /// Caller must pass a point inside the support box.
    fn eval(&self, x: &[f64]) -> f64;
    /// Interior locations per coordinate where `eval` has a kink or jump.
    fn breakpoints(&self) -> Vec<Vec<f64>>;
    fn exact_mean(&self) -> Option<f64> {
        None
    }
    fn exact_variance(&self) -> Option<f64> {
        None
    }

    fn dim(&self) -> usize {
        self.measure().dim()
    }

    fn eval_checked(&self, x: &[f64]) -> Result<f64> {
        let m = self.measure();
        if x.len() != m.dim() {
            return Err(SddError::arg(format!(
                "{} takes {} inputs, got {}",
                self.name(),
                m.dim(),
                x.len()
            )));
        }
        for (c, &xi) in m.components().iter().zip(x) {
            c.check_domain(xi)?;
        }
        Ok(self.eval(x))
    }
}

/// `y = g(x₁) + g(x₂) + w·g(x₁)g(x₂)` on `[-1, 1]²` with uniform inputs,
/// where `g(t) = 1` for `t ≤ 0` and `exp(−λt)` for `t > 0`.
///
/// The defaults `λ = 10`, `w = 1/5` give the standard nonsmooth two-input example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1 {
    pub rate: f64,
    pub interaction: f64,
}

impl Default for Example1 {
    fn default() -> Self {
        Self {
            rate: 10.0,
            interaction: 0.2,
        }
    }
}

impl Example1 {
    pub fn new(rate: f64, interaction: f64) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0 && interaction.is_finite()) {
            return Err(SddError::arg(format!(
                "example1 needs a finite rate >= 0 and finite interaction, got ({rate}, {interaction})"
            )));
        }
        Ok(Self { rate, interaction })
    }

    pub fn g(&self, t: f64) -> f64 {
        if t <= 0.0 {
            1.0
        } else {
            (-self.rate * t).exp()
        }
    }

    /// `E[g(X)]` for `X ~ U[-1, 1]`: `1/2 + (1 − e^{−λ}) / (2λ)`.
    pub fn g_mean(&self) -> f64 {
        0.5 + 0.5 * one_minus_exp_over(self.rate)
    }

    /// `E[g(X)²]`: `1/2 + (1 − e^{−2λ}) / (4λ)`.
    pub fn g_second_moment(&self) -> f64 {
        0.5 + 0.5 * one_minus_exp_over(2.0 * self.rate)
    }
}

/// `(1 − e^{−a}) / a`, continuous at `a = 0`.
fn one_minus_exp_over(a: f64) -> f64 {
    if a == 0.0 {
        1.0
    } else {
        -(-a).exp_m1() / a
    }
}

/// Direct evaluation with domain checking.
pub fn example1(x1: f64, x2: f64) -> Result<f64> {
    Example1::default().eval_checked(&[x1, x2])
}

/// Exact output variance of the default two-input example.
pub fn exact_variance_example1() -> f64 {
    Example1::default()
        .exact_variance()
        .expect("example1 has a closed-form variance")
}

/// `|exact − approx| / exact`.
pub fn relative_variance_error(approx: f64, exact: f64) -> Result<f64> {
    if !(exact > 0.0) {
        return Err(SddError::arg(format!(
            "relative error needs a positive exact variance, got {exact}"
        )));
    }
    Ok((exact - approx).abs() / exact)
}

impl BenchmarkFunction for Example1 {
    fn name(&self) -> &str {
        if *self == Self::default() {
            "example1"
        } else {
            "example1_param"
        }
    }

    fn measure(&self) -> ProductMeasure {
        let u = MeasureSpec::uniform(-1.0, 1.0).expect("valid support");
        ProductMeasure::iid(u, 2).expect("two coordinates")
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let (a, b) = (self.g(x[0]), self.g(x[1]));
        a + b + self.interaction * a * b
    }

    fn breakpoints(&self) -> Vec<Vec<f64>> {
        vec![vec![0.0], vec![0.0]]
    }

    /// `2m₁ + w m₁²`
    fn exact_mean(&self) -> Option<f64> {
        let m1 = self.g_mean();
        Some(2.0 * m1 + self.interaction * m1 * m1)
    }

    /// Expands `E[(A + B + wAB)²]` for independent `A, B` distributed as `g(X)`.
    fn exact_variance(&self) -> Option<f64> {
        let (m1, m2) = (self.g_mean(), self.g_second_moment());
        let w = self.interaction;
        let second = 2.0 * m2 + 2.0 * m1 * m1 + w * w * m2 * m2 + 4.0 * w * m1 * m2;
        let mean = 2.0 * m1 + w * m1 * m1;
        Some((second - mean * mean).max(0.0))
    }
}

/// Five uniform inputs on `[-1, 1]`: shifted absolute values plus a smooth
/// exponential interaction, `Σ_k a_k |x_k − s_k| + ½ exp(0.6 x₁ − 0.4 x₂ + 0.3 x₃ x₄)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Synthetic5d;

impl Synthetic5d {
    const SHIFTS: [f64; 5] = [-0.3, 0.1, 0.45, -0.6, 0.25];
    const WEIGHTS: [f64; 5] = [1.0, 0.8, 0.6, 0.4, 0.2];
}

impl BenchmarkFunction for Synthetic5d {
    fn name(&self) -> &str {
        "synthetic5d"
    }

    fn measure(&self) -> ProductMeasure {
        let u = MeasureSpec::uniform(-1.0, 1.0).expect("valid support");
        ProductMeasure::iid(u, 5).expect("five coordinates")
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let kinks: f64 = x
            .iter()
            .zip(Self::SHIFTS.iter().zip(Self::WEIGHTS))
            .map(|(&xi, (&s, w))| w * (xi - s).abs())
            .sum();
        kinks + 0.5 * (0.6 * x[0] - 0.4 * x[1] + 0.3 * x[2] * x[3]).exp()
    }

    fn breakpoints(&self) -> Vec<Vec<f64>> {
        Self::SHIFTS.iter().map(|&s| vec![s]).collect()
    }
}

/// Looks up a benchmark by its config name.
///
/// `example1_param` reads optional `rate` and `interaction` entries from `params`.
pub fn by_name(
    name: &str,
    params: &serde_json::Map<String, serde_json::Value>,
) -> Result<Box<dyn BenchmarkFunction>> {
    let allowed: &[&str] = match name {
        "example1" | "synthetic5d" => &[],
        "example1_param" => &["rate", "interaction"],
        other => return Err(SddError::arg(format!("unknown benchmark '{other}'"))),
    };
    if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(SddError::arg(format!("unknown param '{extra}' for benchmark {name}")));
    }
    let number = |key: &str, default: f64| -> Result<f64> {
        match params.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| SddError::arg(format!("benchmark param '{key}' must be a number"))),
        }
    };
    Ok(match name {
        "example1" => Box::new(Example1::default()),
        "example1_param" => {
            let d = Example1::default();
            Box::new(Example1::new(
                number("rate", d.rate)?,
                number("interaction", d.interaction)?,
            )?)
        }
        _ => Box::new(Synthetic5d),
    })
}
