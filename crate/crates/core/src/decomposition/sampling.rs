//! Seeded Monte Carlo sampling of inputs, surrogates and reference functions.
//!
//! Samples are produced in blocks of `STREAM_BLOCK`; block `b` draws from the
//! ChaCha8 stream `b` of the run seed. Blocks are evaluated in parallel, but
//! the sample set depends only on `(seed, count)`, never on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{EvalScratch, SddExpansion};
use crate::measures::ProductMeasure;

pub const STREAM_BLOCK: usize = 1 << 14;

fn block_inputs(measure: &ProductMeasure, block: usize, len: usize, seed: u64, mut visit: impl FnMut(&[f64])) {
    let dim = measure.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    let mut u = vec![0.0; dim];
    let mut x = vec![0.0; dim];
    for _ in 0..len {
        for slot in u.iter_mut() {
            *slot = rng.random::<f64>();
        }
        measure.sample_into(&u, &mut x);
        visit(&x);
    }
}

fn blocks(count: usize) -> impl IndexedParallelIterator<Item = (usize, usize)> {
    let n = count.div_ceil(STREAM_BLOCK);
    (0..n)
        .into_par_iter()
        .map(move |b| (b, STREAM_BLOCK.min(count - b * STREAM_BLOCK)))
}

/// `count` input vectors drawn by inverse CDF.
pub fn sample_inputs(measure: &ProductMeasure, count: usize, seed: u64) -> Vec<Vec<f64>> {
    blocks(count)
        .flat_map_iter(|(b, len)| {
            let mut out = Vec::with_capacity(len);
            block_inputs(measure, b, len, seed, |x| out.push(x.to_vec()));
            out
        })
        .collect()
}

/// Output distribution of `f(X)` by direct Monte Carlo.
pub fn sample_function<F>(f: F, measure: &ProductMeasure, count: usize, seed: u64) -> EmpiricalDistribution
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let values = blocks(count)
        .flat_map_iter(|(b, len)| {
            let mut out = Vec::with_capacity(len);
            block_inputs(measure, b, len, seed, |x| out.push(f(x)));
            out
        })
        .collect();
    EmpiricalDistribution::new(values)
}

pub(super) fn sample_surrogate(e: &SddExpansion, count: usize, seed: u64) -> EmpiricalDistribution {
    let values = blocks(count)
        .flat_map_iter(|(b, len)| {
            let mut scratch = EvalScratch::new(e.bases());
            let mut out = Vec::with_capacity(len);
            block_inputs(e.measure(), b, len, seed, |x| out.push(e.evaluate_with(x, &mut scratch)));
            out
        })
        .collect();
    EmpiricalDistribution::new(values)
}

/// Sorted sample with the empirical CDF `F(y) = #{samples <= y} / count`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { sorted: values }
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|&v| v <= y) as f64 / self.sorted.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.sorted.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.sorted.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
    }

    pub fn standard_error(&self) -> f64 {
        (self.variance() / self.sorted.len() as f64).sqrt()
    }

    /// Standard error of the sample variance, from the fourth central moment.
    pub fn variance_standard_error(&self) -> f64 {
        let n = self.sorted.len() as f64;
        let m = self.mean();
        let var = self.variance();
        let m4 = self.sorted.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
        ((m4 - var * var * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    }

    /// Two-sample Kolmogorov–Smirnov statistic `sup_y |F(y) − G(y)|`.
    pub fn ks_distance(&self, other: &Self) -> f64 {
        let (a, b) = (&self.sorted, &other.sorted);
        if a.is_empty() || b.is_empty() {
            return 1.0;
        }
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let (mut i, mut j) = (0, 0);
        let mut sup: f64 = 0.0;
        while i < a.len() || j < b.len() {
            let v = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) => x.min(y),
                (Some(&x), None) => x,
                (None, Some(&y)) => y,
                (None, None) => unreachable!(),
            };
            while i < a.len() && a[i] <= v {
                i += 1;
            }
            while j < b.len() && b[j] <= v {
                j += 1;
            }
            sup = sup.max((i as f64 / na - j as f64 / nb).abs());
        }
        sup
    }

    /// `(y, F(y))` at every `stride`-th order statistic, always including the last.
    pub fn cdf_points(&self, stride: usize) -> Vec<(f64, f64)> {
        let n = self.sorted.len();
        let stride = stride.max(1);
        let mut out: Vec<(f64, f64)> = (0..n)
            .step_by(stride)
            .map(|r| (self.sorted[r], (r + 1) as f64 / n as f64))
            .collect();
        if n > 0 && (n - 1) % stride != 0 {
            out.push((self.sorted[n - 1], 1.0));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::MeasureSpec;

    fn square() -> ProductMeasure {
        ProductMeasure::iid(MeasureSpec::uniform(-1.0, 1.0).unwrap(), 2).unwrap()
    }

    #[test]
    fn same_seed_same_inputs() {
        let a = sample_inputs(&square(), 40_000, 3);
        let b = sample_inputs(&square(), 40_000, 3);
        assert_eq!(a, b);
        let c = sample_inputs(&square(), 40_000, 4);
        assert_ne!(a, c);
    }

    #[test]
    fn thread_count_does_not_change_samples() {
        let reference = sample_function(|x| x[0] + x[1], &square(), 50_000, 9);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| sample_function(|x| x[0] + x[1], &square(), 50_000, 9));
        assert_eq!(reference, single);
    }

    #[test]
    fn prefix_is_stable_under_larger_counts() {
        let short = sample_inputs(&square(), 100, 1);
        let long = sample_inputs(&square(), 1000, 1);
        assert_eq!(&long[..100], &short[..]);
    }

    #[test]
    fn empirical_cdf_and_ks() {
        let d = EmpiricalDistribution::new(vec![3.0, 1.0, 2.0, 2.0]);
        assert_eq!(d.values(), &[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(d.cdf(0.5), 0.0);
        assert_eq!(d.cdf(2.0), 0.75);
        assert_eq!(d.cdf(3.0), 1.0);
        assert_eq!(d.ks_distance(&d), 0.0);
        let shifted = EmpiricalDistribution::new(vec![10.0, 11.0]);
        assert_eq!(d.ks_distance(&shifted), 1.0);
        let half = EmpiricalDistribution::new(vec![1.5, 2.5]);
        // at y = 2.0: F = 0.75, G = 0.5
        assert_eq!(d.ks_distance(&half), 0.25);
    }

    #[test]
    fn constant_function_is_a_unit_step() {
        let d = sample_function(|_| 1.25, &square(), 1000, 0);
        assert!(d.values().iter().all(|&v| v == 1.25));
        assert_eq!(d.cdf(1.2499), 0.0);
        assert_eq!(d.cdf(1.25), 1.0);
        assert_eq!(d.variance(), 0.0);
    }

    #[test]
    fn uniform_moments_within_standard_errors() {
        let d = sample_function(|x| x[0], &square(), 200_000, 21);
        assert!(d.mean().abs() < 4.0 * d.standard_error());
        assert!((d.variance() - 1.0 / 3.0).abs() < 4.0 * d.variance_standard_error());
    }
}
