//! Base-metric quantities of `F = A^{1/m}` at a single point `(x, y)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::calculus::{check_positive_a, hess_y, MetricFunction, Quantity};
use crate::error::{check_dim, Error, Result};
use crate::fields::CoefficientField;
use crate::symmetric_tensor::SymArray;

pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 8;

/// Largest admissible 1-norm condition estimate for a matrix inversion.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Non-fatal conditions attached to evaluated points and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Warning {
    /// m = 2: the Kropina-change closed forms are only derived for m > 2.
    OrderBelowThree,
    /// m = 4: the inverse-tensor scalars divide by m - 4.
    DegenerateOrderFour,
}

impl Warning {
    pub fn message(self) -> &'static str {
        match self {
            Warning::OrderBelowThree => {
                "m = 2 lies outside the m > 2 range of the closed forms; evaluated anyway"
            }
            Warning::DegenerateOrderFour => {
                "m = 4: delta, q, d2, p0..p3 and the closed-form inverse are undefined"
            }
        }
    }
}

pub fn check_order(m: usize) -> Result<()> {
    if (MIN_ORDER..=MAX_ORDER).contains(&m) {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(m))
    }
}

pub fn order_warnings(m: usize) -> Vec<Warning> {
    let mut w = Vec::new();
    if m < 3 {
        w.push(Warning::OrderBelowThree);
    }
    if m == 4 {
        w.push(Warning::DegenerateOrderFour);
    }
    w
}

/// Inverts by LU with partial pivoting, rejecting ill-conditioned input.
pub fn invert_checked(mat: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    let inv = mat
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::SingularMatrix {
            what,
            condition: f64::INFINITY,
        })?;
    let condition = norm_1(mat) * norm_1(&inv);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::SingularMatrix { what, condition });
    }
    Ok(inv)
}

fn norm_1(mat: &DMatrix<f64>) -> f64 {
    mat.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest absolute entry.
pub fn max_abs(mat: &DMatrix<f64>) -> f64 {
    mat.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// `max |a - b|` entrywise.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    max_abs(&(a - b))
}

pub fn identity_residual(product: &DMatrix<f64>) -> f64 {
    max_abs_diff(
        product,
        &DMatrix::identity(product.nrows(), product.ncols()),
    )
}

/// Snapshot of every base-metric quantity at `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub m: usize,
    pub a: f64,
    pub a_i: DVector<f64>,
    pub a_ij: DMatrix<f64>,
    /// All zeros when m < 3.
    pub a_ijk: SymArray,
    pub f: f64,
    /// `l_i = A_i / F^{m-1}`.
    pub l: DVector<f64>,
    /// Closed form `(m-1) A_ij / F^{m-2} - (m-2) A_i A_j / F^{2(m-1)}`.
    pub g: DMatrix<f64>,
    /// Closed form `F^{m-2} A^{ij} / (m-1) + (m-2) y^i y^j / ((m-1) F^2)`.
    pub g_inv: DMatrix<f64>,
    /// Numeric inverse of `A_ij`; satisfies `A^{ij} A_j = y^i`.
    pub a_inv: DMatrix<f64>,
    pub warnings: Vec<Warning>,
}

impl MetricPoint {
    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn y_vec(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.y)
    }
}

pub fn metric_point(field: &CoefficientField, x: &[f64], y: &[f64]) -> Result<MetricPoint> {
    let n = field.dim();
    let m = field.order();
    check_order(m)?;
    check_dim(n, x.len())?;
    check_dim(n, y.len())?;
    let a = check_positive_a(field, x, y)?;

    let tensor = field.tensor_at(x)?;
    let a_i = tensor.contract(y, 1)?.to_vector();
    let a_ij = tensor.contract(y, 2)?.to_matrix();
    let a_ijk = if m >= 3 {
        tensor.contract(y, 3)?
    } else {
        SymArray::zeros(n, 3)
    };

    let mf = m as f64;
    let f = a.powf(1.0 / mf);
    let l = &a_i / f.powi(m as i32 - 1);
    let g = &a_ij * ((mf - 1.0) / f.powi(m as i32 - 2))
        - (&a_i * a_i.transpose()) * ((mf - 2.0) / f.powi(2 * (m as i32 - 1)));

    let a_inv = invert_checked(&a_ij, "A_ij")?;
    let yv = DVector::from_column_slice(y);
    let g_inv = &a_inv * (f.powi(m as i32 - 2) / (mf - 1.0))
        + (&yv * yv.transpose()) * ((mf - 2.0) / ((mf - 1.0) * f * f));

    let point = MetricPoint {
        x: x.to_vec(),
        y: y.to_vec(),
        m,
        a,
        a_i,
        a_ij,
        a_ijk,
        f,
        l,
        g,
        g_inv,
        a_inv,
        warnings: order_warnings(m),
    };
    if !point.f.is_finite()
        || point
            .g
            .iter()
            .chain(point.g_inv.iter())
            .any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite("base metric closed forms".into()));
    }
    Ok(point)
}

/// `g_ij = 1/2 d^2 F^2 / dy^i dy^j` from the oracle.
pub fn oracle_fundamental_tensor(
    field: &CoefficientField,
    x: &[f64],
    y: &[f64],
) -> Result<DMatrix<f64>> {
    Ok(hess_y(&MetricFunction::base(field, Quantity::FSquared), x, y)? * 0.5)
}

/// `h_ij = F d^2 F / dy^i dy^j` from the oracle.
pub fn angular_tensor(field: &CoefficientField, p: &MetricPoint) -> Result<DMatrix<f64>> {
    Ok(hess_y(&MetricFunction::base(field, Quantity::F), &p.x, &p.y)? * p.f)
}

/// Residuals of the base closed forms against the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaseResiduals {
    /// `max |g_closed - 1/2 hess F^2|`.
    pub g_vs_oracle: f64,
    /// `max |g_inv_closed * g_closed - I|`.
    pub inverse_identity: f64,
}

pub fn verify_base_forms(field: &CoefficientField, p: &MetricPoint) -> Result<BaseResiduals> {
    let oracle = oracle_fundamental_tensor(field, &p.x, &p.y)?;
    Ok(BaseResiduals {
        g_vs_oracle: max_abs_diff(&p.g, &oracle),
        inverse_identity: identity_residual(&(&p.g_inv * &p.g)),
    })
}
