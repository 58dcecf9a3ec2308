//! Versioned JSON document for fitted expansions, plus CSV tables.
//!
//! Subsets and basis indices are one-based in these artifacts, so the
//! constant element of every coordinate is index 1 and reduced indices start
//! at 2. Terms are listed in canonical order.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    ExpansionSetup, FitDiagnostics, FitMethod, ReducedMultiIndex, SddExpansion, SubsetIndex, Term,
};
use crate::error::{Result, SddError};
use crate::knots::KnotSequence;
use crate::measures::MeasureSpec;
use crate::orthobasis::OrthonormalBasis1D;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionDocument {
    pub version: u32,
    #[serde(rename = "N")]
    pub dim: usize,
    #[serde(rename = "S")]
    pub order: usize,
    pub coordinates: Vec<CoordinateDocument>,
    pub y0: f64,
    pub terms: Vec<TermDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordinateDocument {
    pub measure: MeasureSpec,
    pub p: usize,
    pub knots: Vec<f64>,
    /// Lower-triangular Cholesky factor of the spline moment matrix, row-major;
    /// the orthonormal basis is its inverse applied to the auxiliary splines.
    pub whitening: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDocument {
    pub u: Vec<usize>,
    pub i_u: Vec<usize>,
    pub c: f64,
}

impl SddExpansion {
    pub fn to_document(&self) -> ExpansionDocument {
        ExpansionDocument {
            version: FORMAT_VERSION,
            dim: self.dim(),
            order: self.order(),
            coordinates: self
                .bases()
                .iter()
                .map(|b| CoordinateDocument {
                    measure: b.measure().clone(),
                    p: b.knots().degree(),
                    knots: b.knots().knots().to_vec(),
                    whitening: b.whitening().to_vec(),
                })
                .collect(),
            y0: self.y0,
            terms: self
                .iter()
                .map(|(t, c)| TermDocument {
                    u: t.subset.coords().iter().map(|k| k + 1).collect(),
                    i_u: t.index.indices().iter().map(|i| i + 1).collect(),
                    c,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_document())
            .expect("expansion documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_document(doc: &ExpansionDocument) -> Result<Self> {
        if doc.version != FORMAT_VERSION {
            return Err(SddError::arg(format!(
                "unsupported expansion format version {} (expected {FORMAT_VERSION})",
                doc.version
            )));
        }
        if doc.coordinates.len() != doc.dim {
            return Err(SddError::arg(format!(
                "document declares N = {} but lists {} coordinates",
                doc.dim,
                doc.coordinates.len()
            )));
        }
        let bases = doc
            .coordinates
            .iter()
            .map(|c| {
                let knots = KnotSequence::new(c.knots.clone(), c.p)?;
                OrthonormalBasis1D::from_parts(knots, c.measure.clone(), c.whitening.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        let setup = ExpansionSetup::new(bases, doc.order)?;
        if doc.terms.len() != setup.terms().len() {
            return Err(SddError::arg(format!(
                "document lists {} terms, S = {} needs {}",
                doc.terms.len(),
                doc.order,
                setup.terms().len()
            )));
        }
        let mut coefficients = Vec::with_capacity(doc.terms.len());
        for (expected, td) in setup.terms().iter().zip(&doc.terms) {
            let term = Term::new(
                SubsetIndex::new(one_based(&td.u)?)?,
                ReducedMultiIndex::new(one_based(&td.i_u)?)?,
            )?;
            if &term != expected {
                return Err(SddError::arg(format!(
                    "term u = {:?}, i_u = {:?} is out of canonical order",
                    td.u, td.i_u
                )));
            }
            coefficients.push(td.c);
        }
        let mut e = setup.with_coefficients(doc.y0, coefficients)?;
        e.diagnostics = FitDiagnostics {
            method: FitMethod::Given,
            condition_estimate: None,
            warnings: Vec::new(),
        };
        Ok(e)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ExpansionDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }
}

fn one_based(v: &[usize]) -> Result<Vec<usize>> {
    v.iter()
        .map(|&i| {
            i.checked_sub(1)
                .ok_or_else(|| SddError::arg("indices in expansion documents are one-based"))
        })
        .collect()
}

/// Full-precision scientific notation (17 significant digits).
pub(crate) fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// `u,i_u,coefficient` rows, constant first with empty `u`.
pub fn coefficients_csv(e: &SddExpansion) -> String {
    let mut out = String::from("u,i_u,coefficient\n");
    let _ = writeln!(out, ",,{}", sci(e.constant()));
    for (t, c) in e.iter() {
        let _ = writeln!(out, "{},{},{}", t.subset, t.index, sci(c));
    }
    out
}

/// `u,variance,fraction` rows per subset.
pub fn variance_csv(e: &SddExpansion) -> String {
    let v = e.variance();
    let mut out = String::from("u,variance,fraction\n");
    for (s, part) in &v.by_subset {
        let fraction = if v.total > 0.0 { part / v.total } else { 0.0 };
        let _ = writeln!(out, "{s},{},{}", sci(*part), sci(fraction));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn expansion(coeffs: &[f64]) -> SddExpansion {
        let bases = vec![
            OrthonormalBasis1D::whiten(
                KnotSequence::open_uniform(-1.0, 1.0, 1, 2, &[]).unwrap(),
                MeasureSpec::uniform(-1.0, 1.0).unwrap(),
            )
            .unwrap(),
            OrthonormalBasis1D::whiten(
                KnotSequence::open_uniform(0.0, 2.0, 2, 1, &[]).unwrap(),
                MeasureSpec::beta(0.0, 2.0, 2.0, 2.0).unwrap(),
            )
            .unwrap(),
        ];
        let setup = ExpansionSetup::new(bases, 2).unwrap();
        setup.with_coefficients(0.75, coeffs.to_vec()).unwrap()
    }

    #[test]
    fn csv_layout() {
        let e = expansion(&[0.1, 0.2, 0.3, 0.4, 0.0, 0.0, 0.0, 0.5]);
        let csv = coefficients_csv(&e);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "u,i_u,coefficient");
        assert_eq!(lines[1], ",,7.5000000000000000e-1");
        assert_eq!(lines[2], "1,2,1.0000000000000001e-1");
        assert_eq!(lines[5], "2,3,4.0000000000000002e-1");
        assert_eq!(lines[9], "1 2,3 3,5.0000000000000000e-1");
        let var = variance_csv(&e);
        assert!(var.starts_with("u,variance,fraction\n1,"));
        assert_eq!(var.lines().count(), 4);
    }

    #[test]
    fn rejects_tampered_documents() {
        let e = expansion(&[0.0; 8]);
        let mut doc = e.to_document();
        doc.version = 2;
        assert!(SddExpansion::from_document(&doc).is_err());
        let mut doc = e.to_document();
        doc.terms.swap(0, 1);
        assert!(SddExpansion::from_document(&doc).is_err());
        let mut doc = e.to_document();
        doc.terms.pop();
        assert!(SddExpansion::from_document(&doc).is_err());
        let text = e.to_json().replace("\"y0\"", "\"extra\": 1, \"y0\"");
        assert!(SddExpansion::from_json(&text).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip_is_byte_stable(coeffs in proptest::collection::vec(-1e3..1e3f64, 8)) {
            let e = expansion(&coeffs);
            let text = e.to_json();
            let back = SddExpansion::from_json(&text).unwrap();
            prop_assert_eq!(back.coefficients(), e.coefficients());
            prop_assert_eq!(back.bases(), e.bases());
            prop_assert_eq!(back.to_json(), text);
        }
    }
}
