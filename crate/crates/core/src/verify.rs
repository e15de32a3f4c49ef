//! Sampled adjudication of every closed form against the oracle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{CoefficientField, OneFormField};
use crate::kropina::{kropina_point, verify_kropina_forms};
use crate::mth_root::order_warnings;
use crate::report::{DiscrepancyAccumulator, DiscrepancyReport, FormResidual};
use crate::sampling::{sample, Rejection, SampleBox};
use crate::spray::{pq_decomposition, verify_spray_forms};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub requested: usize,
    pub attempts: usize,
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
    pub discrepancy: DiscrepancyReport,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.accepted > 0 && self.discrepancy.passed()
    }
}

/// All residual rows at one point.
pub fn point_residuals(
    field: &CoefficientField,
    one_form: &OneFormField,
    x: &[f64],
    y: &[f64],
) -> Result<Vec<FormResidual>> {
    let kp = kropina_point(field, one_form, x, y)?;
    let mut rows = verify_kropina_forms(field, one_form, &kp)?;
    let sp = pq_decomposition(field, one_form, x, y)?;
    rows.extend(verify_spray_forms(&sp, y));
    if rows.iter().any(|r| r.abs.is_some_and(|v| !v.is_finite())) {
        return Err(Error::NonFinite("residual rows".into()));
    }
    Ok(rows)
}

pub fn verify_sampled(
    field: &CoefficientField,
    one_form: &OneFormField,
    samples: usize,
    seed: u64,
    bounds: &SampleBox,
) -> Result<VerifyReport> {
    let warnings = order_warnings(field.order());
    let mut notes = vec![
        "only the lbar row is bounded; the other rows are reported without assertion".to_string(),
        "Q^i is evaluated with both p2 and p3 as the b^i b^l coefficient".to_string(),
    ];
    notes.extend(warnings.iter().map(|w| w.message().to_string()));

    let sampled = sample(field.dim(), samples, seed, bounds, |x, y| {
        point_residuals(field, one_form, x, y)
    })?;
    let mut acc = DiscrepancyAccumulator::new(notes, warnings);
    for s in &sampled.accepted {
        acc.record(s.index, &s.x, &s.y, &s.value);
    }
    Ok(VerifyReport {
        requested: samples,
        attempts: sampled.attempts,
        accepted: sampled.accepted.len(),
        rejected: sampled.rejected,
        discrepancy: acc.finish(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mth_root::Warning;
    use crate::report::FormId;
    use crate::symmetric_tensor::SymmetricTensor;

    #[test]
    fn diag_report_flags_order_four() {
        let field = CoefficientField::constant(
            &SymmetricTensor::new(2, 4)
                .with(&[1, 1, 1, 1], 1.0)
                .unwrap()
                .with(&[2, 2, 2, 2], 1.0)
                .unwrap(),
        );
        let b = OneFormField::constant(&[1.0, 0.0]);
        let r = verify_sampled(&field, &b, 50, 1, &SampleBox::default()).unwrap();
        assert_eq!(r.accepted, 50);
        assert!(r.passed());
        assert!(r
            .discrepancy
            .warnings
            .contains(&Warning::DegenerateOrderFour));
        let inv = r.discrepancy.row(FormId::GbarInvViaA).unwrap();
        assert_eq!((inv.evaluated, inv.undefined), (0, 50));
        assert!(r.discrepancy.row(FormId::LbarClosed).unwrap().pass == Some(true));
    }
}
