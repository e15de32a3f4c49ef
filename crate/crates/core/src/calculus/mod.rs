//! Differentiation oracle.
//!
//! Every closed form elsewhere in the crate is adjudicated against the
//! derivatives computed here: exact second-order forward mode over the `y`
//! variables (and, for mixed quantities, over `x` as well). Coefficient
//! polynomials are differentiated through the same jets, so `x`-derivatives
//! are analytic too. [`fd_check`] cross-checks the jets against
//! Richardson-extrapolated central differences.

mod finite_diff;
mod jet;

pub use finite_diff::{fd_check, richardson_central, FdOrder, FdReport};
pub use jet::Jet;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::fields::{CoefficientField, OneFormField};

/// A scalar `f(x, y)` that can be evaluated on jets.
pub trait ScalarFunction {
    fn dim(&self) -> usize;

    /// Rejects points outside the smooth domain of `f`.
    fn check_domain(&self, _x: &[f64], _y: &[f64]) -> Result<()> {
        Ok(())
    }

    fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Jet;

    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_point(self, x, y)?;
        let xs: Vec<Jet> = x.iter().map(|&v| Jet::constant(v, 0)).collect();
        let ys: Vec<Jet> = y.iter().map(|&v| Jet::constant(v, 0)).collect();
        let v = self.eval_jet(&xs, &ys).value;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("function value".into()))
        }
    }
}

fn check_point<F: ScalarFunction + ?Sized>(f: &F, x: &[f64], y: &[f64]) -> Result<()> {
    check_dim(f.dim(), x.len())?;
    check_dim(f.dim(), y.len())?;
    f.check_domain(x, y)
}

/// Adapter turning a closure over jets into a [`ScalarFunction`].
pub struct FnScalar<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[Jet], &[Jet]) -> Jet> FnScalar<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&[Jet], &[Jet]) -> Jet> ScalarFunction for FnScalar<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Jet {
        (self.f)(x, y)
    }
}

/// Which metric-derived scalar a [`MetricFunction`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// `A = a_{i1...im}(x) y^{i1}...y^{im}`
    A,
    /// `F = A^{1/m}`
    F,
    /// `F^2`
    FSquared,
    /// `Fbar = F^2 / beta`
    Fbar,
    /// `Fbar^2`
    FbarSquared,
}

impl Quantity {
    pub fn needs_one_form(self) -> bool {
        matches!(self, Quantity::Fbar | Quantity::FbarSquared)
    }

    pub fn label(self) -> &'static str {
        match self {
            Quantity::A => "A",
            Quantity::F => "F",
            Quantity::FSquared => "F^2",
            Quantity::Fbar => "Fbar",
            Quantity::FbarSquared => "Fbar^2",
        }
    }
}

/// The scalar functions built from a coefficient field and (optionally) a one-form.
#[derive(Debug, Clone, Copy)]
pub struct MetricFunction<'a> {
    field: &'a CoefficientField,
    one_form: Option<&'a OneFormField>,
    quantity: Quantity,
}

impl<'a> MetricFunction<'a> {
    pub fn base(field: &'a CoefficientField, quantity: Quantity) -> Self {
        assert!(!quantity.needs_one_form(), "{quantity:?} needs a one-form");
        Self {
            field,
            one_form: None,
            quantity,
        }
    }

    pub fn kropina(
        field: &'a CoefficientField,
        one_form: &'a OneFormField,
        quantity: Quantity,
    ) -> Self {
        Self {
            field,
            one_form: Some(one_form),
            quantity,
        }
    }

    pub fn quantity(&self) -> Quantity {
        self.quantity
    }
}

/// `A > 1e-12 * |y|^m * max|c|`, the admissible region for roots of `A`.
pub fn check_positive_a(field: &CoefficientField, x: &[f64], y: &[f64]) -> Result<f64> {
    let a = field.tensor_at(x)?.eval(y)?;
    let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let floor = 1e-12 * ynorm.powi(field.order() as i32) * field.coeff_scale(x);
    if a.is_nan() || a <= floor || a <= 0.0 {
        return Err(Error::Domain(format!(
            "A = {a:e} is not positive (threshold {floor:e})"
        )));
    }
    Ok(a)
}

impl ScalarFunction for MetricFunction<'_> {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn check_domain(&self, x: &[f64], y: &[f64]) -> Result<()> {
        if self.quantity != Quantity::A {
            check_positive_a(self.field, x, y)?;
        }
        if let Some(b) = self.one_form.filter(|_| self.quantity.needs_one_form()) {
            b.check_beta(x, y)?;
        }
        Ok(())
    }

    fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Jet {
        let m = self.field.order() as f64;
        let a = self.field.eval_jet(x, y);
        let beta = || {
            self.one_form
                .expect("Kropina quantity without one-form")
                .beta_jet(x, y)
        };
        match self.quantity {
            Quantity::A => a,
            Quantity::F => a.powf(1.0 / m),
            Quantity::FSquared => a.powf(2.0 / m),
            Quantity::Fbar => a.powf(2.0 / m) / beta(),
            Quantity::FbarSquared => a.powf(4.0 / m) / beta().powi(2),
        }
    }
}

/// Value and all first/second derivatives needed downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub value: f64,
    pub grad_x: DVector<f64>,
    pub grad_y: DVector<f64>,
    pub hess_y: DMatrix<f64>,
    /// Entry `(k, l)` is `d^2 f / dx^k dy^l`.
    pub mixed_xy: DMatrix<f64>,
}

fn finite_jet(jet: Jet, what: &str) -> Result<Jet> {
    if jet.is_finite() {
        Ok(jet)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

fn y_seeded(f: &(impl ScalarFunction + ?Sized), x: &[f64], y: &[f64]) -> Result<Jet> {
    check_point(f, x, y)?;
    let n = f.dim();
    let xs: Vec<Jet> = x.iter().map(|&v| Jet::constant(v, n)).collect();
    let ys: Vec<Jet> = y
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(v, i, n))
        .collect();
    finite_jet(f.eval_jet(&xs, &ys), "y-derivatives")
}

/// First and second derivatives with both `x` and `y` seeded.
pub fn derivatives(
    f: &(impl ScalarFunction + ?Sized),
    x: &[f64],
    y: &[f64],
) -> Result<Derivatives> {
    check_point(f, x, y)?;
    let n = f.dim();
    let d = 2 * n;
    let xs: Vec<Jet> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(v, i, d))
        .collect();
    let ys: Vec<Jet> = y
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(v, n + i, d))
        .collect();
    let jet = finite_jet(f.eval_jet(&xs, &ys), "mixed derivatives")?;
    Ok(Derivatives {
        value: jet.value,
        grad_x: DVector::from_fn(n, |k, _| jet.grad[k]),
        grad_y: DVector::from_fn(n, |l, _| jet.grad[n + l]),
        hess_y: DMatrix::from_fn(n, n, |i, j| jet.hess_at(n + i, n + j)),
        mixed_xy: DMatrix::from_fn(n, n, |k, l| jet.hess_at(k, n + l)),
    })
}

pub fn grad_y(f: &(impl ScalarFunction + ?Sized), x: &[f64], y: &[f64]) -> Result<DVector<f64>> {
    let jet = y_seeded(f, x, y)?;
    Ok(DVector::from_vec(jet.grad))
}

/// `d^2 f / dy^i dy^j`, exactly symmetric.
pub fn hess_y(f: &(impl ScalarFunction + ?Sized), x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
    let jet = y_seeded(f, x, y)?;
    let n = f.dim();
    Ok(DMatrix::from_row_slice(n, n, &jet.hess))
}

pub fn grad_x(f: &(impl ScalarFunction + ?Sized), x: &[f64], y: &[f64]) -> Result<DVector<f64>> {
    Ok(derivatives(f, x, y)?.grad_x)
}

pub fn mixed_xy(f: &(impl ScalarFunction + ?Sized), x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
    Ok(derivatives(f, x, y)?.mixed_xy)
}
