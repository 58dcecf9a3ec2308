//! Bounded univariate probability measures and quadrature against them.
//!
//! Every measure lives on a closed interval `[a, b]`. Densities, CDFs, raw
//! moments and inverse-CDF sampling are provided for the uniform, truncated
//! Gaussian and (shifted, scaled) Beta families. Quadrature rules are composite
//! Gauss–Legendre with the density folded into the weights, so that
//! `rule.integrate(g)` approximates `E[g(X)]`.

use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::gamma::ln_gamma;

use crate::error::{Result, SddError};

const INVERSE_CDF_TOL: f64 = 1e-12;
const MOMENT_ELEMENTS: usize = 16;
const MOMENT_POINTS: usize = 24;

/// Family of a bounded input distribution together with its shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Uniform,
    /// Gaussian with the given pre-truncation mean and standard deviation,
    /// renormalized to the support.
    TruncatedGaussian { mean: f64, std_dev: f64 },
    /// Beta law with shape exponents `alpha` (lower end) and `beta` (upper end),
    /// shifted and scaled onto the support.
    Beta { alpha: f64, beta: f64 },
}

/// A validated, bounded probability law for one input coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureConfig", into = "MeasureConfig")]
pub struct MeasureSpec {
    family: Family,
    lower: f64,
    upper: f64,
    // Truncated Gaussian: Φ at the lower standardized bound and the mass Φ(β) − Φ(α).
    // Beta: ln B(α, β). Unused for the uniform law.
    norm_offset: f64,
    norm_mass: f64,
}

impl MeasureSpec {
    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        Self::new(Family::Uniform, lower, upper)
    }

    pub fn truncated_gaussian(lower: f64, upper: f64, mean: f64, std_dev: f64) -> Result<Self> {
        Self::new(Family::TruncatedGaussian { mean, std_dev }, lower, upper)
    }

    pub fn beta(lower: f64, upper: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::Beta { alpha, beta }, lower, upper)
    }

    /// Validates the parameters and precomputes normalization constants.
    pub fn new(family: Family, lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || upper <= lower {
            return Err(SddError::arg(format!(
                "support [{lower}, {upper}] must be finite with upper > lower"
            )));
        }
        let (norm_offset, norm_mass) = match family {
            Family::Uniform => (0.0, 1.0),
            Family::TruncatedGaussian { mean, std_dev } => {
                if !(std_dev.is_finite() && std_dev > 0.0) || !mean.is_finite() {
                    return Err(SddError::arg(format!(
                        "truncated Gaussian needs finite mean and std_dev > 0, got ({mean}, {std_dev})"
                    )));
                }
                let lo = gaussian_tail_cdf((lower - mean) / std_dev, lower > mean);
                let hi = gaussian_tail_cdf((upper - mean) / std_dev, lower > mean);
                let mass = hi - lo;
                if !(mass > 0.0) {
                    return Err(SddError::arg(
                        "truncated Gaussian carries no probability mass on its support",
                    ));
                }
                (lo, mass)
            }
            Family::Beta { alpha, beta } => {
                if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
                    return Err(SddError::arg(format!(
                        "Beta exponents must be positive, got ({alpha}, {beta})"
                    )));
                }
                (ln_beta(alpha, beta), 1.0)
            }
        };
        Ok(Self {
            family,
            lower,
            upper,
            norm_offset,
            norm_mass,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub(crate) fn check_domain(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(SddError::Domain {
                value: x,
                lower: self.lower,
                upper: self.upper,
            })
        }
    }

    /// Whether the density is a polynomial on the support, and of which degree.
    pub fn polynomial_density_degree(&self) -> Option<usize> {
        match self.family {
            Family::Uniform => Some(0),
            Family::Beta { alpha, beta }
                if alpha.fract() == 0.0 && beta.fract() == 0.0 =>
            {
                Some((alpha + beta - 2.0) as usize)
            }
            _ => None,
        }
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.density_unchecked(x))
    }

    pub(crate) fn density_unchecked(&self, x: f64) -> f64 {
        let width = self.upper - self.lower;
        match self.family {
            Family::Uniform => 1.0 / width,
            Family::TruncatedGaussian { mean, std_dev } => {
                let z = (x - mean) / std_dev;
                (-0.5 * z * z).exp() / (std_dev * (2.0 * std::f64::consts::PI).sqrt() * self.norm_mass)
            }
            Family::Beta { alpha, beta } => {
                let t = ((x - self.lower) / width).clamp(0.0, 1.0);
                let log_kernel = (alpha - 1.0) * t.ln() + (beta - 1.0) * (1.0 - t).ln();
                let value = (log_kernel - self.norm_offset).exp() / width;
                // 0 · ln 0 terms produce NaN at the endpoints when an exponent equals one.
                if value.is_nan() {
                    0.0
                } else {
                    value
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lower {
            return 0.0;
        }
        if x >= self.upper {
            return 1.0;
        }
        match self.family {
            Family::Uniform => (x - self.lower) / (self.upper - self.lower),
            Family::TruncatedGaussian { mean, std_dev } => {
                let f = gaussian_tail_cdf((x - mean) / std_dev, self.lower > mean);
                ((f - self.norm_offset) / self.norm_mass).clamp(0.0, 1.0)
            }
            Family::Beta { alpha, beta } => {
                let t = (x - self.lower) / (self.upper - self.lower);
                beta_reg(alpha, beta, t)
            }
        }
    }

    /// Raw moment `E[X^l]`, analytic for uniform and Beta laws.
    pub fn raw_moment(&self, l: u32) -> f64 {
        if l == 0 {
            return 1.0;
        }
        let (a, b) = (self.lower, self.upper);
        match self.family {
            Family::Uniform => {
                let k = l as i32 + 1;
                (b.powi(k) - a.powi(k)) / (f64::from(l + 1) * (b - a))
            }
            Family::Beta { alpha, beta } => {
                // X = a + (b − a) Z with Z ~ Beta(α, β); expand binomially.
                let width = b - a;
                let mut total = 0.0;
                let mut z_moment = 1.0;
                let mut binom = 1.0;
                for j in 0..=l {
                    if j > 0 {
                        let r = f64::from(j - 1);
                        z_moment *= (alpha + r) / (alpha + beta + r);
                        binom *= f64::from(l - j + 1) / f64::from(j);
                    }
                    total += binom * a.powi((l - j) as i32) * width.powi(j as i32) * z_moment;
                }
                total
            }
            Family::TruncatedGaussian { .. } => {
                let breaks: Vec<f64> = (1..MOMENT_ELEMENTS)
                    .map(|j| a + (b - a) * j as f64 / MOMENT_ELEMENTS as f64)
                    .collect();
                let rule = measure_quadrature(self, &breaks, MOMENT_POINTS)
                    .expect("uniform interior breakpoints are always valid");
                rule.integrate(|x| x.powi(l as i32))
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m1 = self.raw_moment(1);
        self.raw_moment(2) - m1 * m1
    }

    /// Inverse CDF. Closed form for the uniform law, safeguarded Newton on the
    /// monotone CDF otherwise; accurate to `1e-12` in `x`.
    pub fn sample(&self, u: f64) -> f64 {
        let (a, b) = (self.lower, self.upper);
        if u <= 0.0 {
            return a;
        }
        if u >= 1.0 {
            return b;
        }
        if let Family::Uniform = self.family {
            return (a + u * (b - a)).clamp(a, b);
        }
        let (mut lo, mut hi) = (a, b);
        let mut x = a + u * (b - a);
        for _ in 0..200 {
            let residual = self.cdf(x) - u;
            if residual == 0.0 {
                return x;
            }
            if residual < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= INVERSE_CDF_TOL {
                return 0.5 * (lo + hi);
            }
            let slope = self.density_unchecked(x);
            let candidate = x - residual / slope;
            if slope > 0.0 && candidate > lo && candidate < hi {
                if (candidate - x).abs() <= 0.25 * INVERSE_CDF_TOL {
                    return candidate;
                }
                x = candidate;
            } else {
                x = 0.5 * (lo + hi);
            }
        }
        x
    }
}

/// Standard normal CDF through the complementary error function.
pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// `Φ(z)`, or `Φ(z) − 1 = −Q(z)` when the whole support lies right of the mean,
/// so that differences stay accurate far into the upper tail.
fn gaussian_tail_cdf(z: f64, upper_tail: bool) -> f64 {
    if upper_tail {
        -0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
    } else {
        std_normal_cdf(z)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureConfig {
    family: String,
    support: [f64; 2],
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    params: serde_json::Map<String, serde_json::Value>,
}

impl TryFrom<MeasureConfig> for MeasureSpec {
    type Error = SddError;

    fn try_from(cfg: MeasureConfig) -> Result<Self> {
        let [lower, upper] = cfg.support;
        let param = |name: &str| -> Result<f64> {
            cfg.params
                .get(name)
                .and_then(serde_json::Value::as_f64)
                .ok_or_else(|| SddError::arg(format!("{} measure needs numeric param '{name}'", cfg.family)))
        };
        let allowed: &[&str] = match cfg.family.as_str() {
            "uniform" => &[],
            "truncated_gaussian" => &["mean", "std_dev"],
            "beta" => &["alpha", "beta"],
            other => return Err(SddError::arg(format!("unknown measure family '{other}'"))),
        };
        if let Some(extra) = cfg.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(SddError::arg(format!(
                "unknown param '{extra}' for {} measure",
                cfg.family
            )));
        }
        let family = match cfg.family.as_str() {
            "uniform" => Family::Uniform,
            "truncated_gaussian" => Family::TruncatedGaussian {
                mean: param("mean")?,
                std_dev: param("std_dev")?,
            },
            _ => Family::Beta {
                alpha: param("alpha")?,
                beta: param("beta")?,
            },
        };
        MeasureSpec::new(family, lower, upper)
    }
}

impl From<MeasureSpec> for MeasureConfig {
    fn from(m: MeasureSpec) -> Self {
        let mut params = serde_json::Map::new();
        let family = match m.family {
            Family::Uniform => "uniform",
            Family::TruncatedGaussian { mean, std_dev } => {
                params.insert("mean".into(), mean.into());
                params.insert("std_dev".into(), std_dev.into());
                "truncated_gaussian"
            }
            Family::Beta { alpha, beta } => {
                params.insert("alpha".into(), alpha.into());
                params.insert("beta".into(), beta.into());
                "beta"
            }
        };
        MeasureConfig {
            family: family.to_string(),
            support: [m.lower, m.upper],
            params,
        }
    }
}

/// Independent product of univariate measures, one per input coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProductMeasure {
    components: Vec<MeasureSpec>,
}

impl ProductMeasure {
    pub fn new(components: Vec<MeasureSpec>) -> Result<Self> {
        if components.is_empty() {
            return Err(SddError::arg("product measure needs at least one coordinate"));
        }
        Ok(Self { components })
    }

    pub fn iid(measure: MeasureSpec, dim: usize) -> Result<Self> {
        Self::new(vec![measure; dim])
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[MeasureSpec] {
        &self.components
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.components.iter().zip(x).all(|(m, &xi)| m.contains(xi))
    }

    pub fn density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(SddError::arg(format!(
                "point has {} coordinates, measure has {}",
                x.len(),
                self.dim()
            )));
        }
        self.components
            .iter()
            .zip(x)
            .try_fold(1.0, |acc, (m, &xi)| Ok(acc * m.density(xi)?))
    }

    /// Maps a point of the unit cube to the support box by componentwise inverse CDF.
    pub fn sample_into(&self, uniforms: &[f64], out: &mut [f64]) {
        for ((m, &u), slot) in self.components.iter().zip(uniforms).zip(out.iter_mut()) {
            *slot = m.sample(u);
        }
    }
}

/// Nodes and weights of a composite rule on one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub breakpoints: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            deriv = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        if dp != 0.0 {
            deriv = dp;
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn validate_breakpoints(lower: f64, upper: f64, breakpoints: &[f64]) -> Result<()> {
    if let Some(&bad) = breakpoints.iter().find(|&&t| !(t > lower && t < upper)) {
        return Err(SddError::arg(format!(
            "breakpoint {bad} is not strictly inside ({lower}, {upper})"
        )));
    }
    if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SddError::arg("breakpoints must be strictly increasing"));
    }
    Ok(())
}

/// Composite Gauss–Legendre rule for plain Lebesgue measure on `[lower, upper]`.
pub fn composite_legendre(
    lower: f64,
    upper: f64,
    breakpoints: &[f64],
    points_per_element: usize,
) -> Result<QuadratureRule> {
    if points_per_element == 0 {
        return Err(SddError::arg("points_per_element must be at least 1"));
    }
    if !(upper > lower) {
        return Err(SddError::arg(format!("interval [{lower}, {upper}] is empty")));
    }
    validate_breakpoints(lower, upper, breakpoints)?;
    let (ref_nodes, ref_weights) = gauss_legendre(points_per_element);
    let ends: Vec<f64> = std::iter::once(lower)
        .chain(breakpoints.iter().copied())
        .chain(std::iter::once(upper))
        .collect();
    let mut nodes = Vec::with_capacity((ends.len() - 1) * points_per_element);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for w in ends.windows(2) {
        let (l, r) = (w[0], w[1]);
        let half = 0.5 * (r - l);
        let mid = 0.5 * (r + l);
        for (&t, &wt) in ref_nodes.iter().zip(&ref_weights) {
            nodes.push(mid + half * t);
            weights.push(half * wt);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        breakpoints: breakpoints.to_vec(),
    })
}

/// Composite rule whose weights carry the density, so that
/// `rule.integrate(g) ≈ E[g(X)]`.
///
/// Elements use Gauss–Legendre with the density evaluated at the nodes, except
/// that a non-polynomial Beta endpoint factor (non-integer exponent) is absorbed
/// into a Gauss–Jacobi rule on the element touching that endpoint.
pub fn measure_quadrature(
    measure: &MeasureSpec,
    breakpoints: &[f64],
    points_per_element: usize,
) -> Result<QuadratureRule> {
    let mut rule = composite_legendre(
        measure.lower,
        measure.upper,
        breakpoints,
        points_per_element,
    )?;
    for (w, &x) in rule.weights.iter_mut().zip(&rule.nodes) {
        *w *= measure.density_unchecked(x);
    }
    if let Family::Beta { alpha, beta } = measure.family {
        if alpha.fract() != 0.0 || beta.fract() != 0.0 {
            singular_beta_elements(measure, alpha, beta, &mut rule, points_per_element);
        }
    }
    Ok(rule)
}

fn singular_beta_elements(
    m: &MeasureSpec,
    alpha: f64,
    beta: f64,
    rule: &mut QuadratureRule,
    n: usize,
) {
    let (a, b) = (m.lower, m.upper);
    let width = b - a;
    let ends: Vec<f64> = std::iter::once(a)
        .chain(rule.breakpoints.iter().copied())
        .chain(std::iter::once(b))
        .collect();
    let last = ends.len() - 2;
    let log_norm = -m.norm_offset - (alpha + beta - 1.0) * width.ln();
    for e in [0, last] {
        // Exponents of (1 − s) and (1 + s) on the reference element.
        let right = if e == last && beta.fract() != 0.0 { beta - 1.0 } else { 0.0 };
        let left = if e == 0 && alpha.fract() != 0.0 { alpha - 1.0 } else { 0.0 };
        if right == 0.0 && left == 0.0 {
            continue;
        }
        let (l, r) = (ends[e], ends[e + 1]);
        let half = 0.5 * (r - l);
        let mid = 0.5 * (r + l);
        let (nodes, weights) = gauss_jacobi(n, right, left);
        for k in 0..n {
            let s = nodes[k];
            let x = (mid + half * s).clamp(l, r);
            // (x − a)^(α−1) = half^left (1 + s)^left on the first element, and
            // likewise for (b − x) on the last.
            let log_left = if left != 0.0 {
                left * half.ln()
            } else {
                (alpha - 1.0) * (x - a).ln()
            };
            let log_right = if right != 0.0 {
                right * half.ln()
            } else {
                (beta - 1.0) * (b - x).ln()
            };
            rule.nodes[e * n + k] = x;
            rule.weights[e * n + k] = half * weights[k] * (log_norm + log_left + log_right).exp();
        }
    }
}

/// Gauss–Jacobi rule for the weight `(1 − s)^p (1 + s)^q` on `[-1, 1]`
/// (Golub–Welsch), nodes in increasing order.
pub fn gauss_jacobi(n: usize, p: f64, q: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && p > -1.0 && q > -1.0, "invalid Gauss–Jacobi request");
    let diag: Vec<f64> = (0..n)
        .map(|k| {
            let t = 2.0 * k as f64 + p + q;
            if k == 0 {
                (q - p) / (p + q + 2.0)
            } else {
                (q * q - p * p) / (t * (t + 2.0))
            }
        })
        .collect();
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let kf = k as f64;
            let t = 2.0 * kf + p + q;
            let b = if k == 1 {
                4.0 * (1.0 + p) * (1.0 + q) / ((2.0 + p + q).powi(2) * (3.0 + p + q))
            } else {
                4.0 * kf * (kf + p) * (kf + q) * (kf + p + q) / (t * t * (t + 1.0) * (t - 1.0))
            };
            b.sqrt()
        })
        .collect();
    let jacobi = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if i + 1 == j {
            off[i]
        } else if j + 1 == i {
            off[j]
        } else {
            0.0
        }
    });
    let mu0 = ((p + q + 1.0) * std::f64::consts::LN_2 + ln_gamma(p + 1.0) + ln_gamma(q + 1.0)
        - ln_gamma(p + q + 2.0))
    .exp();
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.into_iter().unzip()
}

/// Sorted union of breakpoint sets with exact duplicates removed.
pub fn merge_breakpoints<'a>(sets: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut all: Vec<f64> = sets.into_iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sample_gaussian() -> MeasureSpec {
        MeasureSpec::truncated_gaussian(-1.0, 1.0, -0.5, 0.5).unwrap()
    }

    fn sample_beta() -> MeasureSpec {
        MeasureSpec::beta(-1.0, 1.0, 3.0, 2.0).unwrap()
    }

    #[test]
    fn uniform_density_is_half() {
        let m = MeasureSpec::uniform(-1.0, 1.0).unwrap();
        assert_eq!(m.density(0.0).unwrap(), 0.5);
    }

    #[test]
    fn beta_density_vanishes_at_upper_end() {
        assert_eq!(sample_beta().density(1.0).unwrap(), 0.0);
    }

    #[test]
    fn beta_density_matches_closed_form() {
        // Γ(5)(x+1)²(1−x) / (16 Γ(3) Γ(2))
        let m = sample_beta();
        for &x in &[-0.9, -0.2, 0.0, 0.4, 0.95] {
            let expected = 24.0 * (x + 1.0) * (x + 1.0) * (1.0 - x) / (16.0 * 2.0);
            assert_abs_diff_eq!(m.density(x).unwrap(), expected, epsilon = 1e-13);
        }
    }

    #[test]
    fn truncated_gaussian_matches_closed_form() {
        // 2φ(2x+1) / (Φ(3) − Φ(−1))
        let m = sample_gaussian();
        let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mass = std_normal_cdf(3.0) - std_normal_cdf(-1.0);
        for &x in &[-1.0, -0.3, 0.2, 1.0] {
            let expected = 2.0 * phi(2.0 * x + 1.0) / mass;
            assert_abs_diff_eq!(m.density(x).unwrap(), expected, epsilon = 1e-13);
        }
    }

    #[test]
    fn truncated_gaussian_integrates_to_one() {
        // Oracle: 200-point composite rule over 40 elements of plain Lebesgue measure.
        let m = sample_gaussian();
        let breaks: Vec<f64> = (1..40).map(|j| -1.0 + 2.0 * j as f64 / 40.0).collect();
        let rule = composite_legendre(-1.0, 1.0, &breaks, 20).unwrap();
        let total = rule.integrate(|x| m.density(x).unwrap());
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn density_outside_support_is_domain_error() {
        let m = MeasureSpec::uniform(-1.0, 1.0).unwrap();
        assert!(matches!(m.density(1.5), Err(SddError::Domain { .. })));
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(MeasureSpec::uniform(1.0, 1.0).is_err());
        assert!(MeasureSpec::truncated_gaussian(-1.0, 1.0, 0.0, 0.0).is_err());
        assert!(MeasureSpec::beta(-1.0, 1.0, 0.0, 2.0).is_err());
        assert!(MeasureSpec::beta(-1.0, 1.0, 2.0, -1.0).is_err());
    }

    #[test]
    fn uniform_raw_moments() {
        let m = MeasureSpec::uniform(-1.0, 1.0).unwrap();
        assert_eq!(m.raw_moment(0), 1.0);
        assert_eq!(m.raw_moment(1), 0.0);
        assert_abs_diff_eq!(m.raw_moment(2), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn beta_moments_match_quadrature() {
        let m = sample_beta();
        assert_abs_diff_eq!(m.mean(), 0.2, epsilon = 1e-14);
        let rule = measure_quadrature(&m, &[], 10).unwrap();
        for l in 0..8 {
            assert_abs_diff_eq!(
                rule.integrate(|x| x.powi(l as i32)),
                m.raw_moment(l),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn sample_endpoints_and_uniform_inverse() {
        let m = MeasureSpec::uniform(-1.0, 1.0).unwrap();
        assert_eq!(m.sample(0.75), 0.5);
        for m in [m, sample_gaussian(), sample_beta()] {
            assert_eq!(m.sample(0.0), -1.0);
            assert_eq!(m.sample(1.0), 1.0);
        }
    }

    #[test]
    fn beta_inverse_cdf_sample_mean() {
        use rand::{Rng, SeedableRng};
        let m = sample_beta();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let count = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..count {
            sum += m.sample(rng.random::<f64>());
        }
        let mean = sum / count as f64;
        // a + (b − a) α/(α+β) = 0.2
        let se = (m.variance() / count as f64).sqrt();
        assert!((mean - 0.2).abs() <= 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn two_point_rule_is_exact_for_cubics() {
        let m = MeasureSpec::uniform(-1.0, 1.0).unwrap();
        let rule = measure_quadrature(&m, &[], 2).unwrap();
        assert_abs_diff_eq!(rule.integrate(|x| x * x), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rule.integrate(|x| x * x * x), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn weights_sum_to_one() {
        let uniform = MeasureSpec::uniform(-1.0, 1.0).unwrap();
        let rule = measure_quadrature(&uniform, &[-0.5, 0.25], 3).unwrap();
        assert_abs_diff_eq!(rule.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        for m in [sample_gaussian(), sample_beta()] {
            let rule = measure_quadrature(&m, &[-0.5, 0.0, 0.5], 12).unwrap();
            assert_abs_diff_eq!(rule.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn split_rule_integrates_one_sided_exponential() {
        let m = MeasureSpec::uniform(-1.0, 1.0).unwrap();
        let rule = measure_quadrature(&m, &[0.0], 20).unwrap();
        let got = rule.integrate(|x| if x > 0.0 { (-10.0 * x).exp() } else { 0.0 });
        let expected = (1.0 - (-10.0f64).exp()) / 20.0;
        assert_abs_diff_eq!(got, expected, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_rule_special_cases() {
        let (x, w) = gauss_jacobi(7, 0.0, 0.0);
        let (lx, lw) = gauss_legendre(7);
        for k in 0..7 {
            assert_abs_diff_eq!(x[k], lx[k], epsilon = 1e-14);
            assert_abs_diff_eq!(w[k], lw[k], epsilon = 1e-14);
        }
        // Chebyshev first kind: nodes cos((2k − 1)π / 2n), equal weights π / n.
        let n = 6;
        let (x, w) = gauss_jacobi(n, -0.5, -0.5);
        for k in 0..n {
            let want = -((2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
            assert_abs_diff_eq!(x[k], want, epsilon = 1e-14);
            assert_abs_diff_eq!(w[k], std::f64::consts::PI / n as f64, epsilon = 1e-14);
        }
    }

    #[test]
    fn arcsine_law_moments() {
        // Beta(1/2, 1/2) on [0, 1]: E[X²] = 3/8.
        let m = MeasureSpec::beta(0.0, 1.0, 0.5, 0.5).unwrap();
        for breaks in [vec![], vec![0.2, 0.9]] {
            let rule = measure_quadrature(&m, &breaks, 30).unwrap();
            assert_abs_diff_eq!(rule.integrate(|x| x * x), 0.375, epsilon = 1e-13);
        }
    }

    #[test]
    fn nodes_stay_inside_their_elements() {
        let rule = composite_legendre(0.0, 1.0, &[0.3, 0.7], 5).unwrap();
        let ends = [0.0, 0.3, 0.7, 1.0];
        for (e, chunk) in rule.nodes.chunks(5).enumerate() {
            assert!(chunk.iter().all(|&x| x > ends[e] && x < ends[e + 1]));
        }
    }

    #[test]
    fn bad_breakpoints_are_rejected() {
        let m = MeasureSpec::uniform(-1.0, 1.0).unwrap();
        assert!(measure_quadrature(&m, &[0.5, 0.0], 3).is_err());
        assert!(measure_quadrature(&m, &[-1.0], 3).is_err());
        assert!(measure_quadrature(&m, &[0.0, 2.0], 3).is_err());
        assert!(measure_quadrature(&m, &[], 0).is_err());
    }

    #[test]
    fn measure_json_round_trip() {
        let json = r#"{"family":"beta","support":[-1.0,1.0],"params":{"alpha":3.0,"beta":2.0}}"#;
        let m: MeasureSpec = serde_json::from_str(json).unwrap();
        assert_eq!(m, sample_beta());
        let back: MeasureSpec = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"family":"beta","support":[-1.0,1.0],"params":{"alpha":3.0,"beta":2.0,"gamma":1}}"#;
        assert!(serde_json::from_str::<MeasureSpec>(bad).is_err());
        let bad = r#"{"family":"cauchy","support":[-1.0,1.0]}"#;
        assert!(serde_json::from_str::<MeasureSpec>(bad).is_err());
    }

    fn any_measure() -> impl Strategy<Value = MeasureSpec> {
        let support = (-5.0..5.0f64, 0.1..5.0f64);
        prop_oneof![
            support.clone().prop_map(|(a, w)| MeasureSpec::uniform(a, a + w).unwrap()),
            (support.clone(), -3.0..3.0f64, 0.2..3.0f64).prop_map(|((a, w), mu, s)| {
                MeasureSpec::truncated_gaussian(a, a + w, a + mu * w, s * w).unwrap()
            }),
            (support, 0.5..8.0f64, 0.5..8.0f64)
                .prop_map(|((a, w), al, be)| MeasureSpec::beta(a, a + w, al, be).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn inverse_cdf_round_trips(m in any_measure(), u in 0.0..1.0f64) {
            let x = m.sample(u);
            prop_assert!(m.contains(x));
            prop_assert!((m.cdf(x) - u).abs() <= 1e-10, "cdf(sample(u)) = {} vs {}", m.cdf(x), u);
        }

        #[test]
        fn cdf_is_monotone(m in any_measure(), s in 0.0..1.0f64, t in 0.0..1.0f64) {
            let (a, b) = m.support();
            let (x, y) = (a + s.min(t) * (b - a), a + s.max(t) * (b - a));
            prop_assert!(m.cdf(x) <= m.cdf(y) + 1e-15);
            prop_assert_eq!(m.cdf(a), 0.0);
            prop_assert_eq!(m.cdf(b), 1.0);
        }

        #[test]
        fn density_integrates_to_one(m in any_measure()) {
            let (a, b) = m.support();
            let breaks: Vec<f64> = (1..8).map(|j| a + (b - a) * j as f64 / 8.0).collect();
            let rule = measure_quadrature(&m, &breaks, 50).unwrap();
            let total: f64 = rule.weights.iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-10, "total mass {}", total);
            prop_assert!((rule.integrate(|x| x) - m.mean()).abs() <= 1e-10 * (b - a).max(1.0));
        }

        #[test]
        fn polynomial_densities_are_integrated_exactly(
            a in -2.0..0.0f64, w in 0.5..3.0f64, al in 1u32..5, be in 1u32..5, ppe in 2usize..6
        ) {
            let m = MeasureSpec::beta(a, a + w, al.into(), be.into()).unwrap();
            let deg = m.polynomial_density_degree().unwrap();
            let rule = measure_quadrature(&m, &[a + 0.3 * w], ppe).unwrap();
            for l in 0..(2 * ppe).saturating_sub(deg) {
                let exact = m.raw_moment(l as u32);
                let got = rule.integrate(|x| x.powi(l as i32));
                prop_assert!((got - exact).abs() <= 1e-10 * exact.abs().max(1.0));
            }
        }
    }
}
