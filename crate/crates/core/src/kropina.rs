//! Quantities of the Kropina change `Fbar = F^2 / beta` of an m-th root metric.
//!
//! The closed forms are evaluated term by term, exactly as written, and stored
//! next to the oracle values; nothing here assumes they agree.
//! [`verify_kropina_forms`] measures how far apart they are.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::calculus::{grad_y, hess_y, MetricFunction, Quantity};
use crate::error::{Error, Result};
use crate::fields::{CoefficientField, OneFormField};
use crate::mth_root::{
    identity_residual, invert_checked, max_abs, max_abs_diff, metric_point, MetricPoint, Warning,
};
use crate::report::{FormId, FormResidual};

/// Scalars entering the closed-form inverse metric.
///
/// The `Option` fields divide by `m - 4` (directly or through `delta`) and are
/// `None` at m = 4, or wherever they overflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuxScalars {
    pub tau: f64,
    pub w: f64,
    pub c2: f64,
    pub v: f64,
    /// `b^2 = A^{ij} b_i b_j`.
    pub b2: f64,
    pub delta: Option<f64>,
    pub q: Option<f64>,
    pub d2: Option<f64>,
    pub p0: Option<f64>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub p3: Option<f64>,
    /// Coefficient of `(b^i y^j + b^j y^i)` shared by both closed-form inverses.
    pub cross: Option<f64>,
    pub degenerate_m4: bool,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn aux_scalars(base: &MetricPoint, beta: f64, b: &DVector<f64>) -> AuxScalars {
    let m = base.m as f64;
    let f = base.f;
    let fm = f.powi(base.m as i32);
    let tau = f / beta;
    let b2 = (b.transpose() * &base.a_inv * b)[(0, 0)];

    let w = f.powf(m - 2.0) / (2.0 * tau * tau * (m - 1.0));
    let c2 = f.powf(m - 3.0) * beta * b2 / (2.0 * tau * (m - 1.0));
    let v = (m - 4.0) * beta / (2.0 * fm);

    let degenerate_m4 = base.m == 4;
    let delta = (!degenerate_m4)
        .then(|| -8.0 * f.powi(4) / (beta.powi(4) * (m - 4.0)))
        .and_then(finite);

    let q = delta.and_then(|d| finite(d * w * w / (1.0 + d * c2)));
    let d2 = delta.and_then(|d| {
        finite(
            w * (v * beta
                + v * v * fm
                + (b2 + v * beta) * (1.0 - d * w * (1.0 + v) / (1.0 + d * c2))),
        )
    });
    let tau4 = tau.powi(4);
    // (m - 4) - 8 tau^4 d^2
    let denom = d2.map(|d2| (m - 4.0) - 8.0 * tau4 * d2);

    let p0 = q.zip(denom).and_then(|(q, den)| {
        finite(4.0 * fm * (1.0 + q * (q * (1.0 + v) - (3.0 + v))) / (beta * beta * den))
    });
    let p1 = delta.and_then(|d| {
        let num = 8.0 * (m - 1.0).powi(2) * tau4
            + 2.0 * d * f.powf(2.0 * (m - 2.0))
            + d * f.powf(m - 4.0) * (m - 4.0) * beta;
        let den = 4.0 * tau4 * (m - 1.0).powi(2) + d * f.powf(m - 2.0) * b2 * tau4;
        finite(num / den)
    });
    let p2 = denom.and_then(|den| finite((m - 4.0).powi(2) / (2.0 * f.powi(6) * den)));
    let p3 = denom.and_then(|den| {
        let b4 = beta.powi(4);
        finite(
            ((m - 4.0).powi(2) * (m - 1.0) * tau * tau - (m - 2.0) * den * b4)
                / (2.0 * f * f * tau * tau * b4 * (m - 1.0) * den),
        )
    });
    let cross = p1.zip(d2).and_then(|(p1, d2)| {
        finite(
            2.0 * beta.powi(3) * (m - 4.0) * p1
                / (f * f * (m - 1.0) * (beta.powi(4) * (m - 4.0) - 8.0 * f.powi(4) * d2)),
        )
    });

    AuxScalars {
        tau,
        w,
        c2,
        v,
        b2,
        delta,
        q,
        d2,
        p0,
        p1,
        p2,
        p3,
        cross,
        degenerate_m4,
    }
}

/// Snapshot of the transformed metric at `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KropinaPoint {
    pub base: MetricPoint,
    pub beta: f64,
    pub fbar: f64,
    /// `b_i(x)`.
    pub b: DVector<f64>,
    /// `b^i = A^{ij} b_j`.
    pub b_up: DVector<f64>,
    /// `lbar_i = 2 A_i / (beta F^{m-2}) - F^2 b_i / beta^2`.
    pub lbar: DVector<f64>,
    /// Closed-form angular tensor.
    pub hbar: DMatrix<f64>,
    /// `Fbar * hess_y Fbar`.
    pub hbar_oracle: DMatrix<f64>,
    /// Closed-form fundamental tensor written in `A_ij`.
    pub gbar_via_a: DMatrix<f64>,
    /// Closed-form fundamental tensor written in the base `g_ij`.
    pub gbar_via_g: DMatrix<f64>,
    /// `1/2 hess_y Fbar^2`.
    pub gbar_oracle: DMatrix<f64>,
    pub gbar_inv_numeric: DMatrix<f64>,
    /// Closed-form inverse built on `A^{ij}` and `p2`; `None` at m = 4.
    pub gbar_inv_via_a: Option<DMatrix<f64>>,
    /// Closed-form inverse built on `g^{ij}` and `p3`; `None` at m = 4.
    pub gbar_inv_via_g: Option<DMatrix<f64>>,
    pub aux: AuxScalars,
    pub warnings: Vec<Warning>,
}

impl KropinaPoint {
    pub fn tau(&self) -> f64 {
        self.aux.tau
    }
}

fn sym_outer(a: &DVector<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    a * b.transpose() + b * a.transpose()
}

pub fn kropina_point(
    field: &CoefficientField,
    one_form: &OneFormField,
    x: &[f64],
    y: &[f64],
) -> Result<KropinaPoint> {
    let base = metric_point(field, x, y)?;
    let beta = one_form.check_beta(x, y)?;
    let b = one_form.at(x)?;
    let m = base.m as f64;
    let mi = base.m as i32;
    let f = base.f;
    let fbar = f * f / beta;
    let tau = f / beta;
    let (ai, aij) = (&base.a_i, &base.a_ij);
    let aa = ai * ai.transpose();
    let bb = &b * b.transpose();
    let ab = sym_outer(ai, &b);
    let f_m2 = f.powi(mi - 2);
    let f_m1 = f.powi(mi - 1);
    let f_2m2 = f.powi(2 * (mi - 1));

    let lbar = ai * (2.0 / (beta * f_m2)) - &b * (f * f / (beta * beta));

    let hbar = (aij * ((m - 1.0) / f_m2) - &ab * (1.0 / (f_m2 * beta))
        + &bb * (1.0 / (f * f * beta * beta))
        - &aa * ((m - 2.0) / f_2m2))
        * (2.0 * fbar / beta);

    let gbar_via_a = (aij * ((m - 1.0) / f_m2) - &ab * (2.0 * tau / f_m1)
        + &bb * (tau * tau * (1.0 / f.powi(4) + 0.5))
        - &aa * ((m - 4.0) / f_2m2))
        * (2.0 * tau * tau);

    let gbar_via_g = &base.g * (2.0 * tau * tau) - &ab * (4.0 * tau.powi(3) / f_m1)
        + &bb * ((2.0 + f.powi(4)) / beta.powi(4))
        + &aa * (4.0 * tau * tau / f_2m2);

    let fbar_fn = MetricFunction::kropina(field, one_form, Quantity::Fbar);
    let hbar_oracle = hess_y(&fbar_fn, x, y)? * fbar;
    let gbar_oracle = hess_y(
        &MetricFunction::kropina(field, one_form, Quantity::FbarSquared),
        x,
        y,
    )? * 0.5;
    let gbar_inv_numeric = invert_checked(&gbar_oracle, "gbar_ij")?;

    let b_up = &base.a_inv * &b;
    let aux = aux_scalars(&base, beta, &b);
    let yv = base.y_vec();
    let closed = |lead: DMatrix<f64>, yy: Option<f64>| -> Option<DMatrix<f64>> {
        let (p0, cross, yy) = (aux.p0?, aux.cross?, yy?);
        let mat = lead
            + (&b_up * b_up.transpose()) * p0
            + sym_outer(&b_up, &yv) * cross
            + (&yv * yv.transpose()) * yy;
        mat.iter().all(|v| v.is_finite()).then_some(mat)
    };
    let gbar_inv_via_a = closed(&base.a_inv * (f_m2 / (2.0 * tau * tau * (m - 1.0))), aux.p2);
    let gbar_inv_via_g = closed(&base.g_inv / (2.0 * tau * tau), aux.p3);

    let mut warnings = base.warnings.clone();
    warnings.dedup();

    let point = KropinaPoint {
        base,
        beta,
        fbar,
        b,
        b_up,
        lbar,
        hbar,
        hbar_oracle,
        gbar_via_a,
        gbar_via_g,
        gbar_oracle,
        gbar_inv_numeric,
        gbar_inv_via_a,
        gbar_inv_via_g,
        aux,
        warnings,
    };
    if !point.fbar.is_finite() || point.lbar.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Kropina closed forms".into()));
    }
    Ok(point)
}

/// The closed-form inverse built on `A^{ij}`.
pub fn gbar_inverse_closed(p: &KropinaPoint) -> Result<DMatrix<f64>> {
    closed_or_flag(p, p.gbar_inv_via_a.as_ref())
}

/// The closed-form inverse rewritten on the base `g^{ij}`.
pub fn gbar_inverse_rewritten(p: &KropinaPoint) -> Result<DMatrix<f64>> {
    closed_or_flag(p, p.gbar_inv_via_g.as_ref())
}

fn closed_or_flag(p: &KropinaPoint, mat: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
    match mat {
        Some(m) => Ok(m.clone()),
        None if p.aux.degenerate_m4 => Err(Error::DegenerateOrderFour),
        None => Err(Error::NonFinite("closed-form inverse".into())),
    }
}

fn residual(id: FormId, closed: &DMatrix<f64>, reference: &DMatrix<f64>) -> FormResidual {
    FormResidual::new(id, max_abs_diff(closed, reference), max_abs(reference))
}

/// Residual of every closed form against its oracle counterpart.
pub fn verify_kropina_forms(
    field: &CoefficientField,
    one_form: &OneFormField,
    p: &KropinaPoint,
) -> Result<Vec<FormResidual>> {
    let (x, y) = (&p.base.x, &p.base.y);
    let lbar_oracle = grad_y(
        &MetricFunction::kropina(field, one_form, Quantity::Fbar),
        x,
        y,
    )?;
    let as_col = |v: &DVector<f64>| DMatrix::from_column_slice(v.len(), 1, v.as_slice());

    let mut rows = vec![
        residual(FormId::LbarClosed, &as_col(&p.lbar), &as_col(&lbar_oracle)),
        residual(FormId::HbarClosed, &p.hbar, &p.hbar_oracle),
        residual(FormId::GbarViaA, &p.gbar_via_a, &p.gbar_oracle),
        residual(FormId::GbarViaG, &p.gbar_via_g, &p.gbar_oracle),
    ];
    for (id, id_identity, mat) in [
        (
            FormId::GbarInvViaA,
            FormId::GbarInvViaAIdentity,
            &p.gbar_inv_via_a,
        ),
        (
            FormId::GbarInvViaG,
            FormId::GbarInvViaGIdentity,
            &p.gbar_inv_via_g,
        ),
    ] {
        match mat {
            Some(inv) => {
                rows.push(residual(id, inv, &p.gbar_inv_numeric));
                rows.push(FormResidual::new(
                    id_identity,
                    identity_residual(&(inv * &p.gbar_oracle)),
                    1.0,
                ));
            }
            None => {
                rows.push(FormResidual::undefined(id));
                rows.push(FormResidual::undefined(id_identity));
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Polynomial;
    use crate::symmetric_tensor::SymmetricTensor;

    fn diag() -> CoefficientField {
        CoefficientField::constant(
            &SymmetricTensor::new(2, 4)
                .with(&[1, 1, 1, 1], 1.0)
                .unwrap()
                .with(&[2, 2, 2, 2], 1.0)
                .unwrap(),
        )
    }

    fn fix_x() -> CoefficientField {
        let p = Polynomial::affine(2, 1.0, 0, 1.0);
        CoefficientField::new(2, 3)
            .with(&[1, 1, 1], p.clone())
            .unwrap()
            .with(&[2, 2, 2], p)
            .unwrap()
    }

    #[test]
    fn diag_hand_values() {
        let b = OneFormField::constant(&[1.0, 0.0]);
        let p = kropina_point(&diag(), &b, &[0.0, 0.0], &[1.0, 2.0]).unwrap();
        let s17 = 17f64.sqrt();
        assert_eq!(p.beta, 1.0);
        assert!((p.fbar - s17).abs() < 1e-12);
        assert!((p.lbar[0] + 15.0 / s17).abs() < 1e-12);
        assert!((p.lbar[1] - 16.0 / s17).abs() < 1e-12);
        let ly = p.lbar.dot(&p.base.y_vec());
        assert!((ly - p.fbar).abs() < 1e-9 * p.fbar);
    }

    #[test]
    fn homogeneity_of_fbar() {
        let b = OneFormField::constant(&[1.0, 0.5]);
        let field = fix_x();
        let x = [0.2, -0.3];
        let p1 = kropina_point(&field, &b, &x, &[0.8, 1.3]).unwrap();
        let p2 = kropina_point(&field, &b, &x, &[1.6, 2.6]).unwrap();
        assert!((p2.fbar - 2.0 * p1.fbar).abs() < 1e-12 * p2.fbar);
        assert!(max_abs_diff(&p1.gbar_oracle, &p2.gbar_oracle) <= 1e-9);
    }

    #[test]
    fn m4_is_flagged() {
        let b = OneFormField::constant(&[1.0, 0.0]);
        let p = kropina_point(&diag(), &b, &[0.0, 0.0], &[1.0, 2.0]).unwrap();
        assert!(p.aux.degenerate_m4);
        assert!(p.aux.delta.is_none() && p.aux.p0.is_none() && p.aux.p3.is_none());
        assert!(p.warnings.contains(&Warning::DegenerateOrderFour));
        assert_eq!(gbar_inverse_closed(&p), Err(Error::DegenerateOrderFour));
        assert_eq!(gbar_inverse_rewritten(&p), Err(Error::DegenerateOrderFour));
        // the oracle side still runs
        let ident = identity_residual(&(&p.gbar_inv_numeric * &p.gbar_oracle));
        assert!(ident <= 1e-8);
    }

    #[test]
    fn tau_on_fix_x() {
        let b = OneFormField::constant(&[1.0, 0.0]);
        let p = kropina_point(&fix_x(), &b, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((p.tau() - 2f64.cbrt()).abs() < 1e-15);
        assert_eq!(p.tau() * p.beta - p.base.f, 0.0);
        assert!(!p.aux.degenerate_m4);
        assert!(p.aux.p0.is_some() && p.aux.p2.is_some() && p.aux.p3.is_some());
        assert!(gbar_inverse_closed(&p).is_ok());
    }

    #[test]
    fn lbar_row_is_tight_and_minkowski_rows_are_x_independent() {
        let field = diag();
        let b = OneFormField::constant(&[1.0, 0.3]);
        let y = [0.9, 1.4];
        let at = |x: [f64; 2]| {
            let p = kropina_point(&field, &b, &x, &y).unwrap();
            verify_kropina_forms(&field, &b, &p).unwrap()
        };
        let r0 = at([0.0, 0.0]);
        let r1 = at([0.7, -0.4]);
        assert_eq!(r0[0].id, FormId::LbarClosed);
        assert!(r0[0].abs.unwrap() <= 1e-8);
        for (a, c) in r0.iter().zip(&r1) {
            assert_eq!(a.abs, c.abs);
        }
    }

    #[test]
    fn beta_zero_is_a_domain_error() {
        let b = OneFormField::constant(&[1.0, -1.0]);
        assert!(matches!(
            kropina_point(&diag(), &b, &[0.0, 0.0], &[1.0, 1.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rederived_angular_tensor_matches_oracle() {
        // differentiating lbar gives F^2 b_i b_j / beta^2 where the closed form has 1 / (F^2 beta^2)
        let field = fix_x();
        let b = OneFormField::constant(&[1.0, 0.4]);
        let p = kropina_point(&field, &b, &[0.3, -0.2], &[0.7, 1.1]).unwrap();
        let (f, beta, m) = (p.base.f, p.beta, p.base.m as f64);
        let a = &p.base.a_i;
        let fm2 = f.powi(p.base.m as i32 - 2);
        let h = (&p.base.a_ij * ((m - 1.0) / fm2)
            - (a * a.transpose()) * ((m - 2.0) / (fm2 * fm2 * f * f))
            - sym_outer(a, &p.b) / (fm2 * beta)
            + (&p.b * p.b.transpose()) * (f * f / (beta * beta)))
            * (2.0 * p.fbar / beta);
        assert!(max_abs_diff(&h, &p.hbar_oracle) <= 1e-9 * max_abs(&h));
        let g = &h + &p.lbar * p.lbar.transpose();
        assert!(max_abs_diff(&g, &p.gbar_oracle) <= 1e-9 * max_abs(&g));
    }
}
