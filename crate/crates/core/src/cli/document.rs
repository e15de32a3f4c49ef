//! JSON metric-spec documents.
//!
//! ```json
//! {
//!   "name": "quartic diagonal",
//!   "dimension": 2,
//!   "order": 4,
//!   "tensor": [
//!     { "indices": [1, 1, 1, 1], "poly": [{ "exponents": [0, 0], "coeff": 1.0 }] }
//!   ],
//!   "one_form": [
//!     { "index": 1, "poly": [{ "exponents": [0, 0], "coeff": 1.0 }] }
//!   ]
//! }
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{CoefficientField, OneFormField, Polynomial};
use crate::mth_root::{check_order, order_warnings, Warning, MAX_ORDER, MIN_ORDER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorEntry {
    pub indices: Vec<usize>,
    pub poly: Vec<Monomial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneFormEntry {
    pub index: usize,
    pub poly: Vec<Monomial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpecDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dimension: usize,
    pub order: usize,
    pub tensor: Vec<TensorEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one_form: Option<Vec<OneFormEntry>>,
}

/// A validated document turned into fields.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub document: MetricSpecDocument,
    pub field: CoefficientField,
    pub one_form: Option<OneFormField>,
    pub warnings: Vec<Warning>,
}

fn polynomial(n: usize, at: &str, poly: &[Monomial]) -> Result<Polynomial> {
    for (j, mono) in poly.iter().enumerate() {
        if mono.exponents.len() != n {
            return Err(Error::Validation(format!(
                "{at}.poly[{j}].exponents has length {}, expected {n}",
                mono.exponents.len()
            )));
        }
        if !mono.coeff.is_finite() {
            return Err(Error::Validation(format!(
                "{at}.poly[{j}].coeff is not finite"
            )));
        }
    }
    let mut seen = BTreeSet::new();
    for (j, mono) in poly.iter().enumerate() {
        if !seen.insert(&mono.exponents) {
            return Err(Error::Validation(format!(
                "{at}.poly[{j}] repeats exponents {:?}",
                mono.exponents
            )));
        }
    }
    Polynomial::from_terms(n, poly.iter().map(|m| (m.exponents.clone(), m.coeff)))
}

/// Parses and validates a document.
pub fn parse_spec(text: &str) -> Result<MetricSpec> {
    let document: MetricSpecDocument =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    build(document)
}

pub fn build(document: MetricSpecDocument) -> Result<MetricSpec> {
    let (n, m) = (document.dimension, document.order);
    if n < 2 {
        return Err(Error::Validation(format!("dimension {n} is below 2")));
    }
    if check_order(m).is_err() {
        return Err(Error::Validation(format!(
            "order {m} outside the supported range {MIN_ORDER}..={MAX_ORDER}"
        )));
    }

    let mut field = CoefficientField::new(n, m);
    let mut seen = BTreeSet::new();
    for (i, entry) in document.tensor.iter().enumerate() {
        let at = format!("tensor[{i}]");
        let idx = &entry.indices;
        if idx.len() != m {
            return Err(Error::Validation(format!(
                "{at}.indices has length {}, expected {m}",
                idx.len()
            )));
        }
        if let Some(bad) = idx.iter().find(|&&k| k < 1 || k > n) {
            return Err(Error::Validation(format!(
                "{at}.indices: index {bad} outside 1..={n}"
            )));
        }
        if idx.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Validation(format!(
                "{at}.indices {idx:?} is not canonical (must be non-decreasing)"
            )));
        }
        if !seen.insert(idx.clone()) {
            return Err(Error::Validation(format!(
                "{at}.indices {idx:?} duplicates an earlier entry"
            )));
        }
        field.set(idx, polynomial(n, &at, &entry.poly)?)?;
    }

    let one_form = match &document.one_form {
        None => None,
        Some(entries) => {
            let mut comps = vec![Polynomial::zero(n); n];
            let mut seen = BTreeSet::new();
            for (i, entry) in entries.iter().enumerate() {
                let at = format!("one_form[{i}]");
                if entry.index < 1 || entry.index > n {
                    return Err(Error::Validation(format!(
                        "{at}.index {} outside 1..={n}",
                        entry.index
                    )));
                }
                if !seen.insert(entry.index) {
                    return Err(Error::Validation(format!(
                        "{at}.index {} duplicates an earlier entry",
                        entry.index
                    )));
                }
                comps[entry.index - 1] = polynomial(n, &at, &entry.poly)?;
            }
            Some(OneFormField::new(comps)?)
        }
    };

    Ok(MetricSpec {
        warnings: order_warnings(m),
        document,
        field,
        one_form,
    })
}
