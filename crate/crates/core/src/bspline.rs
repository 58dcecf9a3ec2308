//! Standard B-splines via the Cox–de Boor recursion.
//!
//! Basis indices are zero-based: `i` runs over `0..knots.basis_count()`.
//! Knot spans are half-open `[t_j, t_{j+1})` except the last non-empty span,
//! which is closed at the upper end of the support.

use crate::error::{Result, SddError};
use crate::knots::KnotSequence;

fn check_domain(knots: &KnotSequence, x: f64) -> Result<()> {
    if x >= knots.lower() && x <= knots.upper() {
        Ok(())
    } else {
        Err(SddError::Domain {
            value: x,
            lower: knots.lower(),
            upper: knots.upper(),
        })
    }
}

/// Value of the `i`-th B-spline at `x`, evaluated by the full recursion.
pub fn eval_bspline(knots: &KnotSequence, i: usize, x: f64) -> Result<f64> {
    let n = knots.basis_count();
    if i >= n {
        return Err(SddError::arg(format!("basis index {i} out of range 0..{n}")));
    }
    check_domain(knots, x)?;
    let span = knots.span(x);
    Ok(recurse(knots.knots(), span, i, knots.degree(), x))
}

fn recurse(t: &[f64], span: usize, i: usize, p: usize, x: f64) -> f64 {
    if p == 0 {
        return if i == span { 1.0 } else { 0.0 };
    }
    let mut value = 0.0;
    let left_den = t[i + p] - t[i];
    if left_den > 0.0 {
        value += (x - t[i]) / left_den * recurse(t, span, i, p - 1, x);
    }
    let right_den = t[i + p + 1] - t[i + 1];
    if right_den > 0.0 {
        value += (t[i + p + 1] - x) / right_den * recurse(t, span, i + 1, p - 1, x);
    }
    value
}

/// The `p + 1` possibly nonzero B-splines at `x`.
///
/// Returns the index of the first one together with their values; entries
/// `first..=first + p` of the full basis vector.
pub fn eval_nonzero(knots: &KnotSequence, x: f64) -> Result<(usize, Vec<f64>)> {
    check_domain(knots, x)?;
    let mut values = vec![0.0; knots.degree() + 1];
    let first = eval_nonzero_into(knots, x, &mut values);
    Ok((first, values))
}

/// Triangular Cox–de Boor scheme seeded at the span containing `x`. `values`
/// must hold `degree + 1` slots; `x` must already be inside the support.
pub(crate) fn eval_nonzero_into(knots: &KnotSequence, x: f64, values: &mut [f64]) -> usize {
    let p = knots.degree();
    let span = knots.span(x);
    debug_assert_eq!(values.len(), p + 1);
    if p < STACK_DEGREE {
        let mut left = [0.0f64; STACK_DEGREE];
        let mut right = [0.0f64; STACK_DEGREE];
        triangular(knots.knots(), span, x, values, &mut left[..=p], &mut right[..=p]);
    } else {
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        triangular(knots.knots(), span, x, values, &mut left, &mut right);
    }
    span - p
}

const STACK_DEGREE: usize = 32;

fn triangular(t: &[f64], span: usize, x: f64, values: &mut [f64], left: &mut [f64], right: &mut [f64]) {
    let p = values.len() - 1;
    values[0] = 1.0;
    for j in 1..=p {
        left[j] = x - t[span + 1 - j];
        right[j] = t[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let den = right[r + 1] + left[j - r];
            let temp = if den != 0.0 { values[r] / den } else { 0.0 };
            values[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        values[j] = saved;
    }
}

/// Full vector `(B_0(x), …, B_{n-1}(x))`; at most `p + 1` entries are nonzero.
pub fn eval_all(knots: &KnotSequence, x: f64) -> Result<Vec<f64>> {
    let (first, local) = eval_nonzero(knots, x)?;
    let mut out = vec![0.0; knots.basis_count()];
    out[first..first + local.len()].copy_from_slice(&local);
    Ok(out)
}

/// Support `[t_i, t_{i+p+1}]` of the `i`-th B-spline.
pub fn support(knots: &KnotSequence, i: usize) -> (f64, f64) {
    let t = knots.knots();
    (t[i], t[i + knots.degree() + 1])
}
