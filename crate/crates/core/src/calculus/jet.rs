//! Second-order forward-mode jets: value, gradient and Hessian with respect to
//! a fixed set of seeded variables.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Truncated second-order Taylor expansion of a scalar.
///
/// `hess` is row-major `dim x dim`. Every operation builds it from symmetric
/// pieces, so it is exactly symmetric (not merely within rounding).
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, dim: usize) -> Self {
        Self {
            value,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
        }
    }

    /// The `index`-th seeded variable.
    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut jet = Self::constant(value, dim);
        jet.grad[index] = 1.0;
        jet
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|v| v.is_finite())
            && self.hess.iter().all(|v| v.is_finite())
    }

    /// `f(self)` given `f`, `f'` and `f''` evaluated at `self.value`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let d = self.dim();
        let grad = self.grad.iter().map(|g| f1 * g).collect();
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                hess[i * d + j] = f1 * self.hess[i * d + j] + f2 * (self.grad[i] * self.grad[j]);
            }
        }
        Self {
            value: f0,
            grad,
            hess,
        }
    }

    pub fn powf(&self, p: f64) -> Self {
        let v = self.value;
        self.chain(
            v.powf(p),
            p * v.powf(p - 1.0),
            p * (p - 1.0) * v.powf(p - 2.0),
        )
    }

    pub fn powi(&self, p: i32) -> Self {
        match p {
            0 => Self::constant(1.0, self.dim()),
            1 => self.clone(),
            _ => {
                let v = self.value;
                let pf = p as f64;
                self.chain(
                    v.powi(p),
                    pf * v.powi(p - 1),
                    pf * (pf - 1.0) * v.powi(p - 2),
                )
            }
        }
    }

    pub fn recip(&self) -> Self {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            value: s * self.value,
            grad: self.grad.iter().map(|g| s * g).collect(),
            hess: self.hess.iter().map(|h| s * h).collect(),
        }
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self {
            value: f(self.value, other.value),
            grad: self
                .grad
                .iter()
                .zip(&other.grad)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            hess: self
                .hess
                .iter()
                .zip(&other.hess)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    fn product(&self, other: &Jet) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        let d = self.dim();
        let (a, b) = (self.value, other.value);
        let grad = self
            .grad
            .iter()
            .zip(&other.grad)
            .map(|(ga, gb)| a * gb + b * ga)
            .collect();
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let k = i * d + j;
                hess[k] = a * other.hess[k]
                    + b * self.hess[k]
                    + (self.grad[i] * other.grad[j] + self.grad[j] * other.grad[i]);
            }
        }
        Self {
            value: a * b,
            grad,
            hess,
        }
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(&self, rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $body(self, &rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a: &Jet, b: &Jet| a.zip(b, |x, y| x + y));
jet_binop!(Sub, sub, |a: &Jet, b: &Jet| a.zip(b, |x, y| x - y));
jet_binop!(Mul, mul, |a: &Jet, b: &Jet| a.product(b));
jet_binop!(Div, div, |a: &Jet, b: &Jet| a.product(&b.recip()));

macro_rules! jet_scalar_op {
    ($trait:ident, $method:ident, $jet_scalar:expr, $scalar_jet:expr) => {
        impl $trait<f64> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                $jet_scalar(self, rhs)
            }
        }
        impl $trait<f64> for Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                $jet_scalar(&self, rhs)
            }
        }
        impl $trait<&Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $scalar_jet(self, rhs)
            }
        }
        impl $trait<Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $scalar_jet(self, &rhs)
            }
        }
    };
}

fn shift(a: &Jet, s: f64) -> Jet {
    let mut out = a.clone();
    out.value += s;
    out
}

jet_scalar_op!(Add, add, shift, |s: f64, a: &Jet| shift(a, s));
jet_scalar_op!(
    Sub,
    sub,
    |a: &Jet, s: f64| shift(a, -s),
    |s: f64, a: &Jet| shift(&a.scale(-1.0), s)
);
jet_scalar_op!(Mul, mul, |a: &Jet, s: f64| a.scale(s), |s: f64, a: &Jet| a
    .scale(s));
jet_scalar_op!(
    Div,
    div,
    |a: &Jet, s: f64| a.scale(1.0 / s),
    |s: f64, a: &Jet| a.recip().scale(s)
);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}
