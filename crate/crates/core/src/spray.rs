//! Spray coefficients, the `Gbar = G + P y + Q` split, projective relatedness
//! and geodesic integration.
//!
//! Sprays follow the normalisation
//! `G^i = 1/4 g^{il} ([L]_{x^k y^l} y^k - [L]_{x^l})` with `L = F^2`, for which
//! geodesics solve `x'' + 2 G(x, x') = 0`.

use std::fmt::Write as _;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::calculus::{derivatives, Jet, MetricFunction, Quantity, ScalarFunction};
use crate::error::{check_dim, Error, Result};
use crate::fields::{CoefficientField, OneFormField};
use crate::kropina::{kropina_point, KropinaPoint};
use crate::mth_root::{invert_checked, MetricPoint};
use crate::report::{FormId, FormResidual};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Base,
    Kropina,
}

/// A metric: the m-th root metric itself, or its Kropina change.
#[derive(Debug, Clone, Copy)]
pub struct Metric<'a> {
    pub field: &'a CoefficientField,
    pub one_form: Option<&'a OneFormField>,
    pub kind: MetricKind,
}

impl<'a> Metric<'a> {
    pub fn base(field: &'a CoefficientField) -> Self {
        Self {
            field,
            one_form: None,
            kind: MetricKind::Base,
        }
    }

    pub fn kropina(field: &'a CoefficientField, one_form: &'a OneFormField) -> Self {
        Self {
            field,
            one_form: Some(one_form),
            kind: MetricKind::Kropina,
        }
    }

    fn function(&self, base: Quantity, kropina: Quantity) -> MetricFunction<'a> {
        match (self.kind, self.one_form) {
            (MetricKind::Base, _) => MetricFunction::base(self.field, base),
            (MetricKind::Kropina, Some(b)) => MetricFunction::kropina(self.field, b, kropina),
            (MetricKind::Kropina, None) => unreachable!("Kropina metric built without a one-form"),
        }
    }

    /// `F^2` or `Fbar^2`.
    pub fn lagrangian(&self) -> MetricFunction<'a> {
        self.function(Quantity::FSquared, Quantity::FbarSquared)
    }

    /// `F` or `Fbar`.
    pub fn norm(&self) -> MetricFunction<'a> {
        self.function(Quantity::F, Quantity::Fbar)
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }
}

/// `G^i` of the metric whose square is `lagrangian`, using the numeric
/// inverse of `1/2 hess_y L`.
pub fn spray_coeffs(
    lagrangian: &(impl ScalarFunction + ?Sized),
    x: &[f64],
    y: &[f64],
) -> Result<DVector<f64>> {
    let d = derivatives(lagrangian, x, y)?;
    let g_inv = invert_checked(&(&d.hess_y * 0.5), "fundamental tensor")?;
    let yv = DVector::from_column_slice(y);
    let rhs = d.mixed_xy.transpose() * &yv - &d.grad_x;
    let g = (g_inv * rhs) * 0.25;
    if g.iter().all(|v| v.is_finite()) {
        Ok(g)
    } else {
        Err(Error::NonFinite("spray coefficients".into()))
    }
}

pub fn metric_spray(metric: &Metric, x: &[f64], y: &[f64]) -> Result<DVector<f64>> {
    spray_coeffs(&metric.lagrangian(), x, y)
}

/// Scale-free measure of how far `D = Gbar - G` is from being parallel to `y`:
/// `max_{i<j} |D^i y^j - D^j y^i| / ((|G| + |Gbar|) |y|)`, zero when both
/// sprays vanish.
pub fn wedge_residual(g: &DVector<f64>, gbar: &DVector<f64>, y: &[f64]) -> f64 {
    let d = gbar - g;
    let mut wedge = 0.0f64;
    for i in 0..y.len() {
        for j in i + 1..y.len() {
            wedge = wedge.max((d[i] * y[j] - d[j] * y[i]).abs());
        }
    }
    let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = (g.norm() + gbar.norm()) * ynorm;
    if scale == 0.0 {
        wedge
    } else {
        wedge / scale
    }
}

/// Projective relatedness of `F` and `Fbar` at one point; zero iff
/// `Gbar^i = G^i + P y^i` there.
pub fn projective_residual(
    field: &CoefficientField,
    one_form: &OneFormField,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let g = metric_spray(&Metric::base(field), x, y)?;
    let gbar = metric_spray(&Metric::kropina(field, one_form), x, y)?;
    Ok(wedge_residual(&g, &gbar, y))
}

/// Analytic `x`-derivatives of the closed-form ingredients of the split.
#[derive(Debug, Clone, PartialEq)]
pub struct XDerivatives {
    /// `dg[k][(j, l)] = d g_jl / d x^k` of the closed-form base tensor.
    pub dg: Vec<DMatrix<f64>>,
    /// `X_jl`.
    pub x_tensor: DMatrix<f64>,
    /// `dx_tensor[k][(j, l)] = d X_jl / d x^k`.
    pub dx_tensor: Vec<DMatrix<f64>>,
    /// `omega_k = d(2 tau^2)/d x^k`.
    pub omega: DVector<f64>,
}

fn tangent(value: f64, slope: f64) -> Jet {
    Jet {
        value,
        grad: vec![slope],
        hess: vec![0.0],
    }
}

/// Propagates one `x`-direction through the closed forms of `g_jl`, `X_jl`
/// and `2 tau^2` with first-order jets fed by `tensor_dx` contractions.
pub fn x_derivatives(
    field: &CoefficientField,
    one_form: &OneFormField,
    kp: &KropinaPoint,
) -> Result<XDerivatives> {
    let base = &kp.base;
    let (x, y) = (&base.x, &base.y);
    let n = base.dim();
    let mi = base.m as i32;
    let m = base.m as f64;
    let jac = one_form.jacobian(x)?;

    let mut dg = Vec::with_capacity(n);
    let mut dx_tensor = Vec::with_capacity(n);
    let mut omega = DVector::zeros(n);
    let mut x_tensor = DMatrix::zeros(n, n);

    for k in 0..n {
        let t = field.tensor_dx(x, k)?;
        let da = t.eval(y)?;
        let da_i = t.contract(y, 1)?;
        let da_ij = t.contract(y, 2)?;

        let a = tangent(base.a, da);
        let a_i: Vec<Jet> = (0..n)
            .map(|i| tangent(base.a_i[i], da_i.get(&[i])))
            .collect();
        let b: Vec<Jet> = (0..n).map(|i| tangent(kp.b[i], jac[(i, k)])).collect();
        let dbeta: f64 = (0..n).map(|i| jac[(i, k)] * y[i]).sum();
        let beta = tangent(kp.beta, dbeta);

        let f = a.powf(1.0 / m);
        let tau = &f / &beta;
        let tau2 = tau.powi(2);
        let two_tau2 = tau2.scale(2.0);
        omega[k] = two_tau2.grad[0];

        let f_m2 = f.powi(mi - 2);
        let f_m1 = f.powi(mi - 1);
        let f_2m2 = f.powi(2 * (mi - 1));
        let c_ab = -4.0 * tau.powi(3) / &f_m1;
        let c_bb = (f.powi(4) + 2.0) / beta.powi(4);
        let c_aa = 4.0 * &tau2 / &f_2m2;

        let mut dgk = DMatrix::zeros(n, n);
        let mut dxk = DMatrix::zeros(n, n);
        for j in 0..n {
            for l in 0..n {
                let a_jl = tangent(base.a_ij[(j, l)], da_ij.get(&[j, l]));
                let aa = &a_i[j] * &a_i[l];
                let g = (m - 1.0) * &a_jl / &f_m2 - (m - 2.0) * &aa / &f_2m2;
                dgk[(j, l)] = g.grad[0];
                let xt = &c_ab * (&a_i[j] * &b[l] + &a_i[l] * &b[j])
                    + &c_bb * (&b[l] * &b[j])
                    + &c_aa * &aa;
                dxk[(j, l)] = xt.grad[0];
                if k == 0 {
                    x_tensor[(j, l)] = xt.value;
                }
            }
        }
        dg.push(dgk);
        dx_tensor.push(dxk);
    }
    Ok(XDerivatives {
        dg,
        x_tensor,
        dx_tensor,
        omega,
    })
}

/// `1/4 g^{il} (2 dg_jl/dx^k - dg_jk/dx^l) y^j y^k` from the closed-form base
/// tensor and its analytic derivatives.
pub fn base_spray_from_metric_derivatives(base: &MetricPoint, dg: &[DMatrix<f64>]) -> DVector<f64> {
    let n = base.dim();
    let y = &base.y;
    let gamma = DVector::from_fn(n, |l, _| {
        let mut s = 0.0;
        for j in 0..n {
            for k in 0..n {
                s += (2.0 * dg[k][(j, l)] - dg[l][(j, k)]) * y[j] * y[k];
            }
        }
        s
    });
    (&base.g_inv * gamma) * 0.25
}

/// Oracle sprays next to the closed-form `P`, `Q` split.
#[derive(Debug, Clone, PartialEq)]
pub struct SprayPoint {
    /// Base spray `G^i`.
    pub g: DVector<f64>,
    /// Transformed spray `Gbar^i`.
    pub gbar: DVector<f64>,
    /// `D^i = Gbar^i - G^i`.
    pub d: DVector<f64>,
    pub x_tensor: DMatrix<f64>,
    pub omega: DVector<f64>,
    /// `G^i` rebuilt from the closed-form `g_ij` and its `x`-derivatives.
    pub g_from_dg: DVector<f64>,
    /// `None` when `p1`/`p3` are undefined (m = 4).
    pub p_closed: Option<f64>,
    /// `Q^i` with the `b^i b^l` coefficient read as `p2`.
    pub q_closed_p2: Option<DVector<f64>>,
    /// `Q^i` with the `b^i b^l` coefficient read as `p3`.
    pub q_closed_p3: Option<DVector<f64>>,
    /// The `b^i (pX b^l + p1 y^l) T_l / 4` piece of `Q^i`.
    pub q_b_part_p2: Option<DVector<f64>>,
    pub q_b_part_p3: Option<DVector<f64>>,
    /// The `F^{m-2} A^{il} S_l / (8 tau^2 (m-1))` piece of `Q^i`.
    pub q_a_part: DVector<f64>,
    pub wedge: f64,
}

pub fn pq_decomposition(
    field: &CoefficientField,
    one_form: &OneFormField,
    x: &[f64],
    y: &[f64],
) -> Result<SprayPoint> {
    let kp = kropina_point(field, one_form, x, y)?;
    let g = metric_spray(&Metric::base(field), x, y)?;
    let gbar = metric_spray(&Metric::kropina(field, one_form), x, y)?;
    let d = &gbar - &g;
    let wedge = wedge_residual(&g, &gbar, y);

    let xd = x_derivatives(field, one_form, &kp)?;
    let g_from_dg = base_spray_from_metric_derivatives(&kp.base, &xd.dg);

    let n = y.len();
    let base = &kp.base;
    let tau2 = kp.tau().powi(2);
    let m = base.m as f64;
    let (gm, om) = (&base.g, &xd.omega);
    // s_term: omega and X pieces; t_term adds the 2 tau^2 (dg_jl/dx^k - dg_jk/dx^l) piece
    let mut s_term = DVector::zeros(n);
    let mut t_term = DVector::zeros(n);
    for l in 0..n {
        let (mut s, mut t) = (0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                let yy = y[j] * y[k];
                let sx = 2.0 * om[k] * gm[(j, l)] - om[l] * gm[(j, k)]
                    + 2.0 * xd.dx_tensor[k][(j, l)]
                    - xd.dx_tensor[l][(j, k)];
                s += sx * yy;
                t += (2.0 * tau2 * (xd.dg[k][(j, l)] - xd.dg[l][(j, k)]) + sx) * yy;
            }
        }
        s_term[l] = s;
        t_term[l] = t;
    }

    let yv = base.y_vec();
    let aux = &kp.aux;
    let f = base.f;
    let p_closed = aux.p1.zip(aux.p3).map(|(p1, p3)| {
        0.25 * (&kp.b_up * p1 + &yv * p3).dot(&t_term)
            + (m - 2.0) / (4.0 * tau2 * f * f * (m - 1.0)) * yv.dot(&s_term)
    });
    let q_a_part = &base.a_inv * &s_term * (f.powi(base.m as i32 - 2) / (8.0 * tau2 * (m - 1.0)));
    let b_part = |pb: Option<f64>| {
        aux.p1
            .zip(pb)
            .map(|(p1, pb)| &kp.b_up * (0.25 * (&kp.b_up * pb + &yv * p1).dot(&t_term)))
            .filter(|v| v.iter().all(|c| c.is_finite()))
    };
    let (q_b_part_p2, q_b_part_p3) = (b_part(aux.p2), b_part(aux.p3));
    let q_with = |bp: &Option<DVector<f64>>| bp.as_ref().map(|bp| bp + &q_a_part);

    Ok(SprayPoint {
        g,
        gbar,
        d,
        x_tensor: xd.x_tensor,
        omega: xd.omega,
        g_from_dg,
        p_closed: p_closed.filter(|v| v.is_finite()),
        q_closed_p2: q_with(&q_b_part_p2),
        q_closed_p3: q_with(&q_b_part_p3),
        q_b_part_p2,
        q_b_part_p3,
        q_a_part,
        wedge,
    })
}

fn normal_part(v: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    v - y * (v.dot(y) / y.dot(y))
}

/// Residual rows comparing the closed-form split with the oracle sprays.
pub fn verify_spray_forms(sp: &SprayPoint, y: &[f64]) -> Vec<FormResidual> {
    let yv = DVector::from_column_slice(y);
    let scale = sp.d.amax();
    let mut rows = vec![FormResidual::new(
        FormId::BaseSprayFromMetricDerivatives,
        (&sp.g_from_dg - &sp.g).amax(),
        sp.g.amax(),
    )];
    for (q, split, normal) in [
        (
            &sp.q_closed_p2,
            FormId::SplitWithP2,
            FormId::NormalPartWithP2,
        ),
        (
            &sp.q_closed_p3,
            FormId::SplitWithP3,
            FormId::NormalPartWithP3,
        ),
    ] {
        match (sp.p_closed, q) {
            (Some(p), Some(q)) => {
                let rebuilt = &yv * p + q;
                rows.push(FormResidual::new(split, (&sp.d - rebuilt).amax(), scale));
                let dn = normal_part(&sp.d, &yv);
                rows.push(FormResidual::new(
                    normal,
                    (&dn - normal_part(q, &yv)).amax(),
                    dn.amax(),
                ));
            }
            _ => {
                rows.push(FormResidual::undefined(split));
                rows.push(FormResidual::undefined(normal));
            }
        }
    }
    rows
}

/// One sample of a geodesic: time, position, velocity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum PathStatus {
    Complete,
    /// Integration stopped before `t_end`; samples up to the failure are kept.
    Truncated {
        step: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicPath {
    pub metric: MetricKind,
    pub step: f64,
    pub samples: Vec<PathSample>,
    pub status: PathStatus,
}

impl GeodesicPath {
    pub fn is_complete(&self) -> bool {
        self.status == PathStatus::Complete
    }

    pub fn endpoint(&self) -> &PathSample {
        self.samples
            .last()
            .expect("path has at least the initial sample")
    }

    /// Header `# t x1..xn v1..vn`, then one row per sample at 17 significant digits.
    pub fn write_text(&self, mut out: impl Write) -> io::Result<()> {
        let n = self.samples.first().map_or(0, |s| s.x.len());
        let mut header = String::from("# t");
        for i in 1..=n {
            write!(header, " x{i}").unwrap();
        }
        for i in 1..=n {
            write!(header, " v{i}").unwrap();
        }
        writeln!(out, "{header}")?;
        for s in &self.samples {
            let mut row = format!("{:.16e}", s.t);
            for v in s.x.iter().chain(&s.v) {
                write!(row, " {v:.16e}").unwrap();
            }
            writeln!(out, "{row}")?;
        }
        Ok(())
    }
}

/// Fixed-step classical RK4 on `x' = v`, `v' = -2 G(x, v)`.
pub fn integrate_geodesic(
    metric: &Metric,
    x0: &[f64],
    y0: &[f64],
    t_end: f64,
    steps: usize,
) -> Result<GeodesicPath> {
    let n = metric.dim();
    check_dim(n, x0.len())?;
    check_dim(n, y0.len())?;
    if steps == 0 || !t_end.is_finite() {
        return Err(Error::Validation(
            "geodesic needs steps > 0 and a finite end time".into(),
        ));
    }
    let h = t_end / steps as f64;
    let lagrangian = metric.lagrangian();
    let accel = |x: &[f64], v: &[f64]| -> Result<Vec<f64>> {
        Ok(spray_coeffs(&lagrangian, x, v)?
            .iter()
            .map(|g| -2.0 * g)
            .collect())
    };
    // validate the initial state up front
    accel(x0, y0)?;

    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(p, q)| p + s * q).collect()
    };

    let mut samples = vec![PathSample {
        t: 0.0,
        x: x0.to_vec(),
        v: y0.to_vec(),
    }];
    let mut status = PathStatus::Complete;
    let (mut x, mut v) = (x0.to_vec(), y0.to_vec());
    for step in 0..steps {
        let stage = || -> Result<(Vec<f64>, Vec<f64>)> {
            let k1x = v.clone();
            let k1v = accel(&x, &v)?;
            let (x2, v2) = (axpy(&x, h / 2.0, &k1x), axpy(&v, h / 2.0, &k1v));
            let k2v = accel(&x2, &v2)?;
            let k2x = v2;
            let (x3, v3) = (axpy(&x, h / 2.0, &k2x), axpy(&v, h / 2.0, &k2v));
            let k3v = accel(&x3, &v3)?;
            let k3x = v3;
            let (x4, v4) = (axpy(&x, h, &k3x), axpy(&v, h, &k3v));
            let k4v = accel(&x4, &v4)?;
            let k4x = v4;
            let combine = |y: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
                (0..n)
                    .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                    .collect()
            };
            let xn = combine(&x, &k1x, &k2x, &k3x, &k4x);
            let vn = combine(&v, &k1v, &k2v, &k3v, &k4v);
            if xn.iter().chain(&vn).all(|c| c.is_finite()) {
                Ok((xn, vn))
            } else {
                Err(Error::NonFinite("geodesic state".into()))
            }
        };
        match stage() {
            Ok((xn, vn)) => {
                x = xn;
                v = vn;
                samples.push(PathSample {
                    t: (step + 1) as f64 * h,
                    x: x.clone(),
                    v: v.clone(),
                });
            }
            Err(e) => {
                status = PathStatus::Truncated {
                    step,
                    reason: e.to_string(),
                };
                break;
            }
        }
    }
    Ok(GeodesicPath {
        metric: metric.kind,
        step: h,
        samples,
        status,
    })
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
    fn minkowski_sprays_vanish() {
        let field = diag();
        let b = OneFormField::constant(&[1.0, 0.0]);
        let sp = pq_decomposition(&field, &b, &[0.3, 0.1], &[1.0, 2.0]).unwrap();
        assert!(sp.g.amax() == 0.0 && sp.gbar.amax() == 0.0);
        assert!(sp.omega.amax() == 0.0);
        assert_eq!(sp.wedge, 0.0);
        // m = 4: the split is undefined but the oracle side is filled
        assert!(sp.p_closed.is_none() && sp.q_closed_p2.is_none());
    }

    #[test]
    fn fix_x_base_spray_golden() {
        // symbolic reference: G = (1/12, 1/4)
        let g = metric_spray(&Metric::base(&fix_x()), &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((g[0] - 1.0 / 12.0).abs() < 1e-13);
        assert!((g[1] - 0.25).abs() < 1e-13);
    }

    #[test]
    fn metric_derivative_route_matches_oracle() {
        let field = fix_x();
        let b = OneFormField::new(vec![
            Polynomial::affine(2, 1.0, 1, 1.0),
            Polynomial::zero(2),
        ])
        .unwrap();
        let sp = pq_decomposition(&field, &b, &[0.3, -0.2], &[0.7, 1.1]).unwrap();
        assert!(
            (&sp.g_from_dg - &sp.g).amax() <= 1e-12,
            "{} vs {}",
            sp.g_from_dg,
            sp.g
        );
        assert!(sp.p_closed.is_some() && sp.q_closed_p3.is_some());
    }

    #[test]
    fn analytic_dg_matches_central_differences() {
        let field = fix_x();
        let b = OneFormField::new(vec![
            Polynomial::affine(2, 1.0, 1, 1.0),
            Polynomial::constant(2, 0.4),
        ])
        .unwrap();
        let (x, y) = ([0.3, -0.2], [0.7, 1.1]);
        let kp = kropina_point(&field, &b, &x, &y).unwrap();
        let xd = x_derivatives(&field, &b, &kp).unwrap();
        for k in 0..2 {
            let at = |h: f64| {
                let mut xs = x;
                xs[k] += h;
                kropina_point(&field, &b, &xs, &y).unwrap()
            };
            let h = 1e-5;
            let (p, q) = (at(h), at(-h));
            let fd_g = (&p.base.g - &q.base.g) / (2.0 * h);
            assert!((&fd_g - &xd.dg[k]).amax() <= 1e-7);
            let two_tau2 = |kp: &KropinaPoint| 2.0 * kp.tau().powi(2);
            let fd_omega = (two_tau2(&p) - two_tau2(&q)) / (2.0 * h);
            assert!((fd_omega - xd.omega[k]).abs() <= 1e-7);
        }
    }

    #[test]
    fn wedge_is_zero_for_parallel_difference() {
        let g = DVector::from_vec(vec![1.0, 0.5]);
        let y = [2.0, 3.0];
        let gbar = &g + DVector::from_vec(vec![0.2, 0.3]);
        assert!(wedge_residual(&g, &gbar, &y) < 1e-16);
        assert_eq!(
            wedge_residual(&DVector::zeros(2), &DVector::zeros(2), &y),
            0.0
        );
    }

    #[test]
    fn straight_lines_on_minkowski() {
        let field = diag();
        let path =
            integrate_geodesic(&Metric::base(&field), &[0.0, 0.0], &[1.0, 2.0], 1.0, 10).unwrap();
        assert!(path.is_complete());
        let end = path.endpoint();
        assert!((end.x[0] - 1.0).abs() <= 1e-10 && (end.x[1] - 2.0).abs() <= 1e-10);
        assert_eq!(path.samples.len(), 11);
    }

    #[test]
    fn path_file_format() {
        let field = diag();
        let path =
            integrate_geodesic(&Metric::base(&field), &[0.0, 0.0], &[1.0, 2.0], 1.0, 2).unwrap();
        let mut buf = Vec::new();
        path.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# t x1 x2 v1 v2"));
        let row: Vec<&str> = lines.nth(1).unwrap().split_whitespace().collect();
        assert_eq!(row.len(), 5);
        assert_eq!(row[0], "5.0000000000000000e-1");
    }

    #[test]
    fn truncates_on_domain_exit() {
        // A = (1 + x1)(y1^3 + y2^3) degenerates at x1 = -1
        let field = fix_x();
        let path =
            integrate_geodesic(&Metric::base(&field), &[0.0, 0.0], &[-1.0, 1.2], 3.0, 30).unwrap();
        assert!(
            matches!(path.status, PathStatus::Truncated { .. }),
            "{:?}",
            path.status
        );
    }

    #[test]
    fn geodesics_conserve_the_norm() {
        let field = fix_x();
        let b = OneFormField::constant(&[1.0, 0.0]);
        for metric in [Metric::base(&field), Metric::kropina(&field, &b)] {
            let path = integrate_geodesic(&metric, &[0.0, 0.0], &[1.0, 1.0], 0.5, 50).unwrap();
            assert!(path.is_complete());
            let norm = |s: &PathSample| {
                crate::calculus::derivatives(&metric.norm(), &s.x, &s.v)
                    .unwrap()
                    .value
            };
            let f0 = norm(&path.samples[0]);
            let drift = path
                .samples
                .iter()
                .map(|s| (norm(s) - f0).abs())
                .fold(0.0, f64::max);
            assert!(drift <= 1e-9 * f0, "{:?}: drift {drift:e}", metric.kind);
        }
    }
}
