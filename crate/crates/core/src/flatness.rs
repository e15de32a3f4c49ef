//! Dually-flat, projectively-flat and projectively-related checks.
//!
//! Verdicts come from operational residuals built on the oracle. The closed
//! characterisations in terms of `A` are evaluated term by term next to them
//! and only reported.

use nalgebra::DVector;
use serde::Serialize;

use crate::calculus::{check_positive_a, derivatives, MetricFunction, Quantity};
use crate::error::{Error, Result};
use crate::fields::{CoefficientField, OneFormField};
use crate::report::PointRef;
use crate::sampling::{sample, Rejection, SampleBox};
use crate::spray::{pq_decomposition, projective_residual, Metric};

pub const DEFAULT_TOL: f64 = 1e-8;
/// Fewest accepted samples that can certify a passing verdict.
pub const MIN_VERDICT_SAMPLES: usize = 50;

/// `max_l |r_l|` and `max_l |r_l| / (1 + |value|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperationalResidual {
    pub raw: f64,
    pub normalized: f64,
    /// `Fbar^2` (dually flat) or `Fbar` (projectively flat) at the point.
    pub value: f64,
}

fn operational(
    f: &MetricFunction,
    x: &[f64],
    y: &[f64],
    factor: f64,
) -> Result<OperationalResidual> {
    let d = derivatives(f, x, y)?;
    let yv = DVector::from_column_slice(y);
    let r = d.mixed_xy.transpose() * yv - &d.grad_x * factor;
    let raw = r.amax();
    Ok(OperationalResidual {
        raw,
        normalized: raw / (1.0 + d.value.abs()),
        value: d.value,
    })
}

/// `[L]_{x^k y^l} y^k - 2 [L]_{x^l}` with `L = F^2` or `Fbar^2`.
pub fn dually_flat_residual(metric: &Metric, x: &[f64], y: &[f64]) -> Result<OperationalResidual> {
    operational(&metric.lagrangian(), x, y, 2.0)
}

/// `N_{x^k y^l} y^k - N_{x^l}` with `N = F` or `Fbar`.
pub fn proj_flat_residual(metric: &Metric, x: &[f64], y: &[f64]) -> Result<OperationalResidual> {
    operational(&metric.norm(), x, y, 1.0)
}

/// Building blocks of the closed characterisations, at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessIntermediates {
    pub a: f64,
    pub beta: f64,
    pub b: Vec<f64>,
    /// `A_0 = A_{x^k} y^k`, from the coefficient-field derivatives.
    pub a0: f64,
    /// `A_{0l} = A_{x^k y^l} y^k`.
    pub a0l: Vec<f64>,
    /// `A_{x^l}`.
    pub axl: Vec<f64>,
    /// `A_{y^l} = dA/dy^l`.
    pub ayl: Vec<f64>,
    /// `beta_l = b_{kl} y^k = d beta / d x^l`.
    pub beta_l: Vec<f64>,
    /// `beta_k y^k`.
    pub beta0: f64,
}

pub fn intermediates(
    field: &CoefficientField,
    one_form: &OneFormField,
    x: &[f64],
    y: &[f64],
) -> Result<FlatnessIntermediates> {
    let a = check_positive_a(field, x, y)?;
    let beta = one_form.check_beta(x, y)?;
    let d = derivatives(&MetricFunction::base(field, Quantity::A), x, y)?;
    let n = y.len();
    let mut a0 = 0.0;
    for (k, yk) in y.iter().enumerate() {
        a0 += field.tensor_dx(x, k)?.eval(y)? * yk;
    }
    let a0l = (0..n)
        .map(|l| (0..n).map(|k| d.mixed_xy[(k, l)] * y[k]).sum())
        .collect();
    let jac = one_form.jacobian(x)?;
    let beta_l: Vec<f64> = (0..n)
        .map(|l| (0..n).map(|k| jac[(k, l)] * y[k]).sum())
        .collect();
    let beta0 = beta_l.iter().zip(y).map(|(p, q)| p * q).sum();
    Ok(FlatnessIntermediates {
        a,
        beta,
        b: one_form.at(x)?.iter().copied().collect(),
        a0,
        a0l,
        axl: d.grad_x.iter().copied().collect(),
        ayl: d.grad_y.iter().copied().collect(),
        beta_l,
        beta0,
    })
}

/// Per-component `lhs = A_{x^l}` against the closed right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedCondition {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub residual: f64,
    /// Right-hand side with the alternate final term, where one exists.
    pub rhs_alt: Option<Vec<f64>>,
    pub residual_alt: Option<f64>,
}

fn max_gap(lhs: &[f64], rhs: &[f64]) -> f64 {
    lhs.iter()
        .zip(rhs)
        .fold(0.0, |acc, (p, q)| acc.max((p - q).abs()))
}

/// Dually-flat characterisation, term by term; the free `y^k` of the
/// `A_{y^l}` term is read as `beta_k y^k`.
pub fn dually_flat_closed_condition(
    field: &CoefficientField,
    one_form: &OneFormField,
    x: &[f64],
    y: &[f64],
) -> Result<ClosedCondition> {
    let t = intermediates(field, one_form, x, y)?;
    let m = field.order() as f64;
    let (a, beta) = (t.a, t.beta);
    let f2 = a.powf(2.0 / m);
    let rhs: Vec<f64> = (0..y.len())
        .map(|l| {
            (4.0 - m) / m * t.a0 * t.ayl[l] / (2.0 * beta * f2) + 0.5 * t.a0l[l]
                - t.a0 * t.b[l] / beta
                - t.ayl[l] * t.beta0 / beta
                + 3.0 * m / (4.0 * beta * beta) * a * t.beta0 * t.b[l]
                + m / (2.0 * beta) * a * t.beta_l[l]
                - t.axl[l]
                + m / (2.0 * beta) * a * t.b[l]
        })
        .collect();
    finish(t.axl, rhs, None)
}

/// Projectively-flat characterisation, term by term. The alternate right-hand
/// side replaces the final `(m/beta) A beta_k y^k b_l` by
/// `(m/beta^2) A beta_k y^k b_l`, the power that dividing through produces.
pub fn proj_flat_closed_condition(
    field: &CoefficientField,
    one_form: &OneFormField,
    x: &[f64],
    y: &[f64],
) -> Result<ClosedCondition> {
    let t = intermediates(field, one_form, x, y)?;
    let m = field.order() as f64;
    let (a, beta) = (t.a, t.beta);
    let common: Vec<f64> = (0..y.len())
        .map(|l| {
            (2.0 - m) / m * t.ayl[l] * t.a0 / a + t.a0l[l]
                - t.a0 * t.b[l] / beta
                - t.ayl[l] * t.beta0 / beta
        })
        .collect();
    let last = |p: i32| -> Vec<f64> {
        (0..y.len())
            .map(|l| common[l] + m / beta.powi(p) * a * t.beta0 * t.b[l])
            .collect()
    };
    finish(t.axl, last(1), Some(last(2)))
}

fn finish(lhs: Vec<f64>, rhs: Vec<f64>, rhs_alt: Option<Vec<f64>>) -> Result<ClosedCondition> {
    let residual = max_gap(&lhs, &rhs);
    let residual_alt = rhs_alt.as_ref().map(|r| max_gap(&lhs, r));
    if !residual.is_finite() || residual_alt.is_some_and(|r| !r.is_finite()) {
        return Err(Error::NonFinite("closed flatness condition".into()));
    }
    Ok(ClosedCondition {
        lhs,
        rhs,
        residual,
        rhs_alt,
        residual_alt,
    })
}

/// Projectively-related condition `b-part(p2) = A-part` of `Q^i`, compared
/// componentwise; `None` where the `p` scalars are undefined (m = 4).
pub fn proj_related_closed_residual(
    field: &CoefficientField,
    one_form: &OneFormField,
    x: &[f64],
    y: &[f64],
) -> Result<Option<f64>> {
    let sp = pq_decomposition(field, one_form, x, y)?;
    Ok(sp.q_b_part_p2.map(|bp| (bp - &sp.q_a_part).amax()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    DuallyFlat,
    ProjectivelyFlat,
    ProjectivelyRelated,
}

impl CheckKind {
    pub fn label(self) -> &'static str {
        match self {
            CheckKind::DuallyFlat => "dually-flat",
            CheckKind::ProjectivelyFlat => "proj-flat",
            CheckKind::ProjectivelyRelated => "proj-related",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    FlatWithinTol,
    NotFlat,
    RelatedWithinTol,
    NotRelated,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::FlatWithinTol => "flat-within-tol",
            Verdict::NotFlat => "not-flat",
            Verdict::RelatedWithinTol => "related-within-tol",
            Verdict::NotRelated => "not-related",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn passed(self) -> bool {
        matches!(self, Verdict::FlatWithinTol | Verdict::RelatedWithinTol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Operational residual (normalised for flatness, wedge for relatedness).
    pub residual: f64,
    pub raw: f64,
    pub closed_residual: Option<f64>,
    pub closed_residual_alt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessReport {
    pub kind: CheckKind,
    pub metric: crate::spray::MetricKind,
    pub tol: f64,
    pub requested: usize,
    pub attempts: usize,
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
    pub max_residual: Option<f64>,
    pub max_raw: Option<f64>,
    pub point_of_max: Option<PointRef>,
    pub max_closed_residual: Option<f64>,
    pub max_closed_residual_alt: Option<f64>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
    pub records: Vec<CheckRecord>,
}

fn fold_max(acc: Option<f64>, v: Option<f64>) -> Option<f64> {
    match (acc, v) {
        (a, None) => a,
        (None, b) => b,
        (Some(a), Some(b)) => Some(if b.is_nan() || b > a { b } else { a }),
    }
}

/// Runs one check over seeded samples. Without a one-form the flatness
/// checks apply to the base metric and no closed condition is evaluated.
pub fn run_check(
    kind: CheckKind,
    field: &CoefficientField,
    one_form: Option<&OneFormField>,
    samples: usize,
    seed: u64,
    bounds: &SampleBox,
    tol: f64,
) -> Result<FlatnessReport> {
    let metric = match one_form {
        Some(b) => Metric::kropina(field, b),
        None if kind == CheckKind::ProjectivelyRelated => {
            return Err(Error::Validation("proj-related needs a one-form".into()))
        }
        None => Metric::base(field),
    };
    let mut notes = Vec::new();
    if one_form.is_some() {
        notes.push(
            match kind {
                CheckKind::DuallyFlat => {
                    "closed dually-flat condition evaluated as stated; it keeps -A_{x^l} on its right side"
                }
                CheckKind::ProjectivelyFlat => {
                    "closed projectively-flat condition evaluated as stated; alt uses (m/beta^2) in its last term"
                }
                CheckKind::ProjectivelyRelated => "closed relatedness condition evaluated with p2",
            }
            .to_string(),
        );
    }
    if field.order() == 4 && kind == CheckKind::ProjectivelyRelated {
        notes.push("m = 4: the closed relatedness condition is undefined".into());
    }

    let sampled = sample(
        field.dim(),
        samples,
        seed,
        bounds,
        |x, y| -> Result<CheckRecord> {
            let mut rec = CheckRecord {
                index: 0,
                x: vec![],
                y: vec![],
                residual: 0.0,
                raw: 0.0,
                closed_residual: None,
                closed_residual_alt: None,
            };
            match kind {
                CheckKind::DuallyFlat | CheckKind::ProjectivelyFlat => {
                    let op = if kind == CheckKind::DuallyFlat {
                        dually_flat_residual(&metric, x, y)?
                    } else {
                        proj_flat_residual(&metric, x, y)?
                    };
                    rec.residual = op.normalized;
                    rec.raw = op.raw;
                    if let Some(b) = one_form {
                        let pc = if kind == CheckKind::DuallyFlat {
                            dually_flat_closed_condition(field, b, x, y)?
                        } else {
                            proj_flat_closed_condition(field, b, x, y)?
                        };
                        rec.closed_residual = Some(pc.residual);
                        rec.closed_residual_alt = pc.residual_alt;
                    }
                }
                CheckKind::ProjectivelyRelated => {
                    let b = one_form.expect("checked above");
                    rec.residual = projective_residual(field, b, x, y)?;
                    rec.raw = rec.residual;
                    rec.closed_residual = proj_related_closed_residual(field, b, x, y)?;
                }
            }
            if !rec.residual.is_finite() {
                return Err(Error::NonFinite("operational residual".into()));
            }
            Ok(rec)
        },
    )?;

    let mut report = FlatnessReport {
        kind,
        metric: metric.kind,
        tol,
        requested: samples,
        attempts: sampled.attempts,
        accepted: sampled.accepted.len(),
        rejected: sampled.rejected,
        max_residual: None,
        max_raw: None,
        point_of_max: None,
        max_closed_residual: None,
        max_closed_residual_alt: None,
        notes,
        verdict: Verdict::Inconclusive,
        records: Vec::with_capacity(sampled.accepted.len()),
    };
    for s in sampled.accepted {
        let mut rec = s.value;
        rec.index = s.index;
        rec.x = s.x;
        rec.y = s.y;
        if report.max_residual.is_none_or(|m| rec.residual > m) {
            report.max_residual = Some(rec.residual);
            report.point_of_max = Some(PointRef {
                index: rec.index,
                x: rec.x.clone(),
                y: rec.y.clone(),
            });
        }
        report.max_raw = fold_max(report.max_raw, Some(rec.raw));
        report.max_closed_residual = fold_max(report.max_closed_residual, rec.closed_residual);
        report.max_closed_residual_alt =
            fold_max(report.max_closed_residual_alt, rec.closed_residual_alt);
        report.records.push(rec);
    }

    let related = kind == CheckKind::ProjectivelyRelated;
    report.verdict = match report.max_residual {
        Some(r) if r > tol => {
            if related {
                Verdict::NotRelated
            } else {
                Verdict::NotFlat
            }
        }
        Some(_) if report.accepted >= MIN_VERDICT_SAMPLES => {
            if related {
                Verdict::RelatedWithinTol
            } else {
                Verdict::FlatWithinTol
            }
        }
        _ => Verdict::Inconclusive,
    };
    Ok(report)
}
