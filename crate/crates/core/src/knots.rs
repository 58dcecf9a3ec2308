//! (p+1)-open knot sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SddError};

/// A non-decreasing knot vector whose end knots are each repeated `degree + 1` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKnots", into = "RawKnots")]
pub struct KnotSequence {
    knots: Vec<f64>,
    degree: usize,
    distinct: Vec<f64>,
    multiplicities: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawKnots {
    degree: usize,
    knots: Vec<f64>,
}

impl TryFrom<RawKnots> for KnotSequence {
    type Error = SddError;
    fn try_from(raw: RawKnots) -> Result<Self> {
        KnotSequence::new(raw.knots, raw.degree)
    }
}

impl From<KnotSequence> for RawKnots {
    fn from(k: KnotSequence) -> Self {
        RawKnots {
            degree: k.degree,
            knots: k.knots,
        }
    }
}

impl KnotSequence {
    /// Validates an explicit flat knot vector.
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        if knots.iter().any(|t| !t.is_finite()) {
            return Err(SddError::arg("knots must be finite"));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(SddError::arg("knots must be non-decreasing"));
        }
        let mut distinct: Vec<f64> = Vec::new();
        let mut multiplicities: Vec<usize> = Vec::new();
        for &t in &knots {
            match distinct.last() {
                Some(&last) if last == t => *multiplicities.last_mut().unwrap() += 1,
                _ => {
                    distinct.push(t);
                    multiplicities.push(1);
                }
            }
        }
        if distinct.len() < 2 {
            return Err(SddError::arg("knot sequence needs at least two distinct knots"));
        }
        let r = distinct.len();
        if multiplicities[0] != degree + 1 || multiplicities[r - 1] != degree + 1 {
            return Err(SddError::arg(format!(
                "end knots must each appear exactly {} times for degree {degree}, got {} and {}",
                degree + 1,
                multiplicities[0],
                multiplicities[r - 1]
            )));
        }
        if let Some((j, &m)) = multiplicities[1..r - 1]
            .iter()
            .enumerate()
            .find(|&(_, &m)| m > degree + 1)
        {
            return Err(SddError::arg(format!(
                "interior knot {} has multiplicity {m} > degree + 1 = {}",
                distinct[j + 1],
                degree + 1
            )));
        }
        Ok(Self {
            knots,
            degree,
            distinct,
            multiplicities,
        })
    }

    /// Builds the flat vector from distinct knots and their multiplicities.
    pub fn from_distinct(distinct: &[f64], multiplicities: &[usize], degree: usize) -> Result<Self> {
        if distinct.len() != multiplicities.len() {
            return Err(SddError::arg("distinct knots and multiplicities differ in length"));
        }
        if distinct.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SddError::arg("distinct knots must be strictly increasing"));
        }
        if multiplicities.contains(&0) {
            return Err(SddError::arg("multiplicities must be at least 1"));
        }
        let knots = distinct
            .iter()
            .zip(multiplicities)
            .flat_map(|(&t, &m)| std::iter::repeat_n(t, m))
            .collect();
        Self::new(knots, degree)
    }

    /// Uniformly spaced distinct knots on `[a, b]` with `elements` elements.
    ///
    /// Interior knots are simple unless listed in `multiplicities` as
    /// `(interior_index, multiplicity)`, where interior indices run from 1 to
    /// `elements - 1`.
    pub fn open_uniform(
        a: f64,
        b: f64,
        degree: usize,
        elements: usize,
        multiplicities: &[(usize, usize)],
    ) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(SddError::arg(format!("interval [{a}, {b}] must have b > a")));
        }
        if elements == 0 {
            return Err(SddError::arg("at least one element is required"));
        }
        let mut mult = vec![1usize; elements + 1];
        mult[0] = degree + 1;
        mult[elements] = degree + 1;
        for &(j, m) in multiplicities {
            if j == 0 || j >= elements {
                return Err(SddError::arg(format!(
                    "interior knot index {j} is outside 1..{}",
                    elements.saturating_sub(1)
                )));
            }
            if m == 0 || m > degree + 1 {
                return Err(SddError::arg(format!(
                    "multiplicity {m} at interior knot {j} must lie in [1, {}]",
                    degree + 1
                )));
            }
            mult[j] = m;
        }
        let width = b - a;
        let distinct: Vec<f64> = (0..=elements)
            .map(|j| {
                if j == elements {
                    b
                } else {
                    a + width * j as f64 / elements as f64
                }
            })
            .collect();
        Self::from_distinct(&distinct, &mult, degree)
    }

    /// Uniform sequence on `[a, b]` whose central knot has multiplicity two.
    pub fn open_uniform_repeated_center(a: f64, b: f64, degree: usize, elements: usize) -> Result<Self> {
        if elements % 2 != 0 || elements < 2 {
            return Err(SddError::arg(format!(
                "a central knot needs an even element count, got {elements}"
            )));
        }
        Self::open_uniform(a, b, degree, elements, &[(elements / 2, 2)])
    }

    /// Single-element sequence: the spline space is all polynomials of `degree`.
    pub fn bernstein(a: f64, b: f64, degree: usize) -> Result<Self> {
        Self::open_uniform(a, b, degree, 1, &[])
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn distinct(&self) -> &[f64] {
        &self.distinct
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Distinct knots strictly inside the support.
    pub fn interior_distinct(&self) -> &[f64] {
        &self.distinct[1..self.distinct.len() - 1]
    }

    pub fn lower(&self) -> f64 {
        self.distinct[0]
    }

    pub fn upper(&self) -> f64 {
        self.distinct[self.distinct.len() - 1]
    }

    pub fn element_count(&self) -> usize {
        self.distinct.len() - 1
    }

    /// Number of B-splines: interior multiplicities plus `degree + 1`.
    pub fn basis_count(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Largest distance between consecutive distinct knots.
    pub fn mesh_size(&self) -> f64 {
        self.distinct
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index `j` of the knot span `[t_j, t_{j+1})` containing `x`, with the last
    /// non-empty span closed at the upper end.
    pub(crate) fn span(&self, x: f64) -> usize {
        let n = self.basis_count();
        let p = self.degree;
        if x >= self.knots[n] {
            return n - 1;
        }
        // Largest j in [p, n-1] with knots[j] <= x.
        let upper = self.knots[p + 1..=n].partition_point(|&t| t <= x);
        p + upper
    }
}
