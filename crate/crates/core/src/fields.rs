//! Position-dependent coefficients `a_{i1...im}(x)` and `b_i(x)`, each a
//! multivariate polynomial in `x` with exact partial derivatives.
//!
//! Axes (`x` positions) are 0-based; tensor indices stay 1-based as in
//! [`crate::symmetric_tensor`].

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::calculus::Jet;
use crate::error::{check_dim, Error, Result};
use crate::symmetric_tensor::{canonicalize, multiplicity, SymmetricTensor};

/// Sum of monomials `coeff * prod_j x_j^{e_j}` with no repeated exponent tuple.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; n], c);
        p
    }

    /// `c + x_axis`.
    pub fn affine(n: usize, c: f64, axis: usize, slope: f64) -> Self {
        let mut p = Self::constant(n, c);
        let mut e = vec![0; n];
        e[axis] = 1;
        p.add_term(e, slope);
        p
    }

    /// Builds a polynomial, summing repeated exponent tuples.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Self> {
        let mut p = Self::zero(n);
        for (e, c) in terms {
            check_dim(n, e.len())?;
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, exponents: Vec<u32>, coeff: f64) {
        let slot = self.terms.entry(exponents).or_insert(0.0);
        *slot += coeff;
        if *slot == 0.0 {
            self.terms.retain(|_, c| *c != 0.0);
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, &c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(&k, &xi)| xi.powi(k as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn eval_jet(&self, x: &[Jet]) -> Jet {
        let dim = x.first().map_or(0, Jet::dim);
        let mut acc = Jet::constant(0.0, dim);
        for (e, &c) in &self.terms {
            let mut term = Jet::constant(c, dim);
            for (&k, xi) in e.iter().zip(x) {
                if k > 0 {
                    term = term * xi.powi(k as i32);
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// Exact `d/dx_axis`.
    pub fn partial(&self, axis: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, &c) in &self.terms {
            if e[axis] > 0 {
                let mut de = e.clone();
                de[axis] -= 1;
                out.add_term(de, c * e[axis] as f64);
            }
        }
        out
    }

    /// Largest |coefficient|, used for domain guards.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }
}

fn check_axis(axis: usize, n: usize) -> Result<()> {
    if axis < n {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index: axis + 1, n })
    }
}

/// `a_{i1...im}(x)`: one polynomial per canonical index multiset.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoefficientField {
    n: usize,
    m: usize,
    entries: BTreeMap<Vec<usize>, Polynomial>,
}

impl CoefficientField {
    pub fn new(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            entries: BTreeMap::new(),
        }
    }

    /// A field with the same constant value everywhere.
    pub fn constant(tensor: &SymmetricTensor) -> Self {
        let mut field = Self::new(tensor.dim(), tensor.order());
        for (idx, c) in tensor.entries() {
            field.entries.insert(
                idx.indices().to_vec(),
                Polynomial::constant(tensor.dim(), c),
            );
        }
        field
    }

    pub fn set(&mut self, raw: &[usize], poly: Polynomial) -> Result<()> {
        check_dim(self.m, raw.len())?;
        check_dim(self.n, poly.dim())?;
        let key = canonicalize(raw, self.n)?.indices().to_vec();
        if poly.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, poly);
        }
        Ok(())
    }

    pub fn with(mut self, raw: &[usize], poly: Polynomial) -> Result<Self> {
        self.set(raw, poly)?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[usize], &Polynomial)> {
        self.entries.iter().map(|(k, p)| (k.as_slice(), p))
    }

    #[cfg(test)]
    pub(crate) fn entry_mut(&mut self, raw: &[usize]) -> Option<&mut Polynomial> {
        self.entries.get_mut(raw)
    }

    /// True when no coefficient depends on `x`.
    pub fn is_constant(&self) -> bool {
        self.entries.values().all(Polynomial::is_constant)
    }

    pub fn tensor_at(&self, x: &[f64]) -> Result<SymmetricTensor> {
        check_dim(self.n, x.len())?;
        self.materialize(|p| p.eval(x))
    }

    /// Entrywise `d/dx_axis` of the coefficients, evaluated at `x`.
    pub fn tensor_dx(&self, x: &[f64], axis: usize) -> Result<SymmetricTensor> {
        check_dim(self.n, x.len())?;
        check_axis(axis, self.n)?;
        self.materialize(|p| p.partial(axis).eval(x))
    }

    fn materialize(&self, mut f: impl FnMut(&Polynomial) -> f64) -> Result<SymmetricTensor> {
        let mut t = SymmetricTensor::new(self.n, self.m);
        for (idx, p) in &self.entries {
            t.set(idx, f(p))?;
        }
        Ok(t)
    }

    /// `A(x, y)` on jets; the oracle's single entry point into the field.
    pub fn eval_jet(&self, x: &[Jet], y: &[Jet]) -> Jet {
        let dim = y.first().map_or(0, Jet::dim);
        let mut acc = Jet::constant(0.0, dim);
        for (idx, p) in &self.entries {
            let mut term = p.eval_jet(x).scale(multiplicity(idx) as f64);
            for &i in idx {
                term = term * &y[i - 1];
            }
            acc = acc + term;
        }
        acc
    }

    /// Largest stored |coefficient| over all polynomials (domain guard scale).
    pub fn coeff_scale(&self, x: &[f64]) -> f64 {
        self.entries
            .values()
            .fold(0.0, |acc, p| acc.max(p.eval(x).abs()))
    }
}

/// `b_i(x)`, the components of the one-form `beta = b_i(x) y^i`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OneFormField {
    components: Vec<Polynomial>,
}

impl OneFormField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let n = components.len();
        for c in &components {
            check_dim(n, c.dim())?;
        }
        Ok(Self { components })
    }

    pub fn constant(b: &[f64]) -> Self {
        let n = b.len();
        Self {
            components: b.iter().map(|&c| Polynomial::constant(n, c)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    #[cfg(test)]
    pub(crate) fn component_mut(&mut self, i: usize) -> &mut Polynomial {
        &mut self.components[i]
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(Polynomial::is_constant)
    }

    pub fn at(&self, x: &[f64]) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(DVector::from_iterator(
            self.dim(),
            self.components.iter().map(|p| p.eval(x)),
        ))
    }

    /// `b_ij = d b_i / d x^j`.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dim();
        check_dim(n, x.len())?;
        Ok(DMatrix::from_fn(n, n, |i, j| {
            self.components[i].partial(j).eval(x)
        }))
    }

    pub fn beta(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.dim(), y.len())?;
        Ok(self.at(x)?.iter().zip(y).map(|(b, v)| b * v).sum())
    }

    pub fn beta_jet(&self, x: &[Jet], y: &[Jet]) -> Jet {
        let dim = y.first().map_or(0, Jet::dim);
        let mut acc = Jet::constant(0.0, dim);
        for (p, yi) in self.components.iter().zip(y) {
            if !p.is_zero() {
                acc = acc + p.eval_jet(x) * yi;
            }
        }
        acc
    }

    /// `|beta| < 1e-12 * |y| * max_i |b_i|` is outside the Kropina domain.
    pub fn check_beta(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let beta = self.beta(x, y)?;
        let b = self.at(x)?;
        let bmax = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if bmax == 0.0 || beta.abs() < 1e-12 * ynorm * bmax || beta == 0.0 {
            return Err(Error::Domain(format!(
                "beta = {beta:e} vanishes at the point (|y| = {ynorm:e}, max|b| = {bmax:e})"
            )));
        }
        Ok(beta)
    }
}
