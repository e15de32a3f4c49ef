//! Discrepancy bookkeeping: closed forms against the differentiation oracle.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::mth_root::Warning;

/// Bound asserted on the supporting-element row; every other row is report-only.
pub const LBAR_BOUND: f64 = 1e-8;

/// Identifies one closed form (or closed-form identity) under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormId {
    LbarClosed,
    HbarClosed,
    GbarViaA,
    GbarViaG,
    GbarInvViaA,
    GbarInvViaAIdentity,
    GbarInvViaG,
    GbarInvViaGIdentity,
    BaseSprayFromMetricDerivatives,
    SplitWithP2,
    SplitWithP3,
    NormalPartWithP2,
    NormalPartWithP3,
}

impl FormId {
    pub fn key(self) -> &'static str {
        match self {
            FormId::LbarClosed => "lbar",
            FormId::HbarClosed => "hbar",
            FormId::GbarViaA => "gbar_via_a",
            FormId::GbarViaG => "gbar_via_g",
            FormId::GbarInvViaA => "gbar_inv_via_a",
            FormId::GbarInvViaAIdentity => "gbar_inv_via_a*gbar-I",
            FormId::GbarInvViaG => "gbar_inv_via_g",
            FormId::GbarInvViaGIdentity => "gbar_inv_via_g*gbar-I",
            FormId::BaseSprayFromMetricDerivatives => "base_spray_dg",
            FormId::SplitWithP2 => "spray_split[p2]",
            FormId::SplitWithP3 => "spray_split[p3]",
            FormId::NormalPartWithP2 => "q_normal[p2]",
            FormId::NormalPartWithP3 => "q_normal[p3]",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            FormId::LbarClosed => "2A_i/(beta F^(m-2)) - F^2 b_i/beta^2 vs grad_y Fbar",
            FormId::HbarClosed => "closed angular tensor vs Fbar hess_y Fbar",
            FormId::GbarViaA => "gbar_ij in A_ij, A_i, b_i vs 1/2 hess_y Fbar^2",
            FormId::GbarViaG => "gbar_ij in g_ij, A_i, b_i vs 1/2 hess_y Fbar^2",
            FormId::GbarInvViaA => "closed gbar^ij (A^ij, p0, p1, p2) vs numeric inverse",
            FormId::GbarInvViaAIdentity => "closed gbar^ij (A^ij, p2) times oracle gbar_ij minus I",
            FormId::GbarInvViaG => "closed gbar^ij (g^ij, p0, p1, p3) vs numeric inverse",
            FormId::GbarInvViaGIdentity => "closed gbar^ij (g^ij, p3) times oracle gbar_ij minus I",
            FormId::BaseSprayFromMetricDerivatives => {
                "1/4 g^il (2 dg_jl/dx^k - dg_jk/dx^l) y^j y^k vs oracle G^i"
            }
            FormId::SplitWithP2 => "Gbar - G vs P y + Q (Q read with p2)",
            FormId::SplitWithP3 => "Gbar - G vs P y + Q (Q read with p3)",
            FormId::NormalPartWithP2 => "y-normal part of Gbar - G vs that of Q (p2)",
            FormId::NormalPartWithP3 => "y-normal part of Gbar - G vs that of Q (p3)",
        }
    }

    pub fn bound(self) -> Option<f64> {
        (self == FormId::LbarClosed).then_some(LBAR_BOUND)
    }
}

/// Residual of one form at one point; `abs == None` means the form is
/// undefined there (m = 4 singular family).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormResidual {
    pub id: FormId,
    pub abs: Option<f64>,
    pub rel: Option<f64>,
}

impl FormResidual {
    /// `rel = abs / scale` (or `abs` when the reference vanishes).
    pub fn new(id: FormId, abs: f64, scale: f64) -> Self {
        let rel = if scale > 0.0 { abs / scale } else { abs };
        Self {
            id,
            abs: Some(abs),
            rel: Some(rel),
        }
    }

    pub fn undefined(id: FormId) -> Self {
        Self {
            id,
            abs: None,
            rel: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRef {
    pub index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyRow {
    pub formula: &'static str,
    pub description: &'static str,
    pub bound: Option<f64>,
    pub evaluated: usize,
    pub undefined: usize,
    pub max_abs: Option<f64>,
    pub max_rel: Option<f64>,
    pub point_of_max: Option<PointRef>,
    /// `None` for report-only rows.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub points: usize,
    pub notes: Vec<String>,
    pub warnings: Vec<Warning>,
    pub rows: Vec<DiscrepancyRow>,
}

impl DiscrepancyReport {
    /// True when every bounded row passed.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn row(&self, id: FormId) -> Option<&DiscrepancyRow> {
        self.rows.iter().find(|r| r.formula == id.key())
    }
}

#[derive(Debug, Default)]
struct RowAcc {
    evaluated: usize,
    undefined: usize,
    max_abs: Option<f64>,
    max_rel: Option<f64>,
    point_of_max: Option<PointRef>,
}

/// Folds per-point residuals into a [`DiscrepancyReport`].
#[derive(Debug, Default)]
pub struct DiscrepancyAccumulator {
    points: usize,
    notes: Vec<String>,
    warnings: Vec<Warning>,
    rows: BTreeMap<FormId, RowAcc>,
}

impl DiscrepancyAccumulator {
    pub fn new(notes: Vec<String>, warnings: Vec<Warning>) -> Self {
        Self {
            notes,
            warnings,
            ..Self::default()
        }
    }

    pub fn record(&mut self, index: usize, x: &[f64], y: &[f64], residuals: &[FormResidual]) {
        self.points += 1;
        for r in residuals {
            let acc = self.rows.entry(r.id).or_default();
            match r.abs {
                None => acc.undefined += 1,
                Some(abs) => {
                    acc.evaluated += 1;
                    // a NaN residual sticks as the maximum
                    if acc.max_abs.is_none_or(|m| abs > m || abs.is_nan()) {
                        acc.max_abs = Some(abs);
                        acc.point_of_max = Some(PointRef {
                            index,
                            x: x.to_vec(),
                            y: y.to_vec(),
                        });
                    }
                    let rel = r.rel.unwrap_or(abs);
                    if acc.max_rel.is_none_or(|m| rel > m) {
                        acc.max_rel = Some(rel);
                    }
                }
            }
        }
    }

    pub fn finish(self) -> DiscrepancyReport {
        let rows = self
            .rows
            .into_iter()
            .map(|(id, acc)| {
                let bound = id.bound();
                let pass = bound.map(|b| acc.evaluated > 0 && acc.max_abs.is_some_and(|m| m <= b));
                DiscrepancyRow {
                    formula: id.key(),
                    description: id.description(),
                    bound,
                    evaluated: acc.evaluated,
                    undefined: acc.undefined,
                    max_abs: acc.max_abs,
                    max_rel: acc.max_rel,
                    point_of_max: acc.point_of_max,
                    pass,
                }
            })
            .collect();
        DiscrepancyReport {
            points: self.points,
            notes: self.notes,
            warnings: self.warnings,
            rows,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accumulates_maxima_and_bounds() {
        let mut acc = DiscrepancyAccumulator::new(vec![], vec![]);
        acc.record(
            0,
            &[0.0],
            &[1.0],
            &[
                FormResidual::new(FormId::LbarClosed, 1e-12, 1.0),
                FormResidual::new(FormId::GbarViaA, 0.5, 2.0),
                FormResidual::undefined(FormId::GbarInvViaA),
            ],
        );
        acc.record(
            1,
            &[0.5],
            &[2.0],
            &[
                FormResidual::new(FormId::LbarClosed, 3e-12, 1.0),
                FormResidual::new(FormId::GbarViaA, 0.25, 0.0),
            ],
        );
        let report = acc.finish();
        assert_eq!(report.points, 2);
        assert!(report.passed());
        let lbar = report.row(FormId::LbarClosed).unwrap();
        assert_eq!(lbar.max_abs, Some(3e-12));
        assert_eq!(lbar.point_of_max.as_ref().unwrap().index, 1);
        assert_eq!(lbar.pass, Some(true));
        let g = report.row(FormId::GbarViaA).unwrap();
        assert_eq!(g.max_abs, Some(0.5));
        assert_eq!(g.max_rel, Some(0.25));
        assert_eq!(g.pass, None);
        let inv = report.row(FormId::GbarInvViaA).unwrap();
        assert_eq!((inv.evaluated, inv.undefined), (0, 1));
        assert_eq!(inv.max_abs, None);
    }

    #[test]
    fn failing_bound_fails_the_report() {
        let mut acc = DiscrepancyAccumulator::new(vec![], vec![]);
        acc.record(
            0,
            &[0.0],
            &[1.0],
            &[FormResidual::new(FormId::LbarClosed, 1e-3, 1.0)],
        );
        assert!(!acc.finish().passed());
    }
}
