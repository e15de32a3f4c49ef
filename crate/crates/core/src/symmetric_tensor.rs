//! Order-m symmetric coefficient arrays stored by index multiset.
//!
//! Only one canonical value is kept per multiset of indices; the number of
//! distinct permutations of each multiset is carried alongside it so that a
//! full contraction with `y` is a sum over at most `C(n+m-1, m)` terms.
//!
//! All indices crossing the public surface are 1-based.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

/// Highest contraction order exposed by [`SymmetricTensor::contract`].
pub const MAX_CONTRACTION_ORDER: usize = 3;

/// A sorted index multiset together with its permutation count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultisetIndex {
    indices: Vec<usize>,
    multiplicity: u64,
}

impl MultisetIndex {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Number of distinct orderings, `m! / prod(count_i!)`.
    pub fn multiplicity(&self) -> u64 {
        self.multiplicity
    }

    pub fn order(&self) -> usize {
        self.indices.len()
    }
}

/// Sorts `raw` into canonical order, validating each index against `1..=n`.
pub fn canonicalize(raw: &[usize], n: usize) -> Result<MultisetIndex> {
    if let Some(&index) = raw.iter().find(|&&i| i < 1 || i > n) {
        return Err(Error::IndexOutOfRange { index, n });
    }
    let mut indices = raw.to_vec();
    indices.sort_unstable();
    let multiplicity = multiplicity(&indices);
    Ok(MultisetIndex {
        indices,
        multiplicity,
    })
}

/// Multinomial coefficient of a sorted index list.
pub(crate) fn multiplicity(sorted: &[usize]) -> u64 {
    let mut result = factorial(sorted.len());
    let mut run = 1;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            result /= factorial(run);
            run = 1;
        }
    }
    if !sorted.is_empty() {
        result /= factorial(run);
    }
    result
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// Dense fully-symmetric array of order 0..=3 produced by a partial contraction.
///
/// Storage is row-major over 0-based positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SymArray {
    n: usize,
    order: usize,
    data: Vec<f64>,
}

impl SymArray {
    pub fn zeros(n: usize, order: usize) -> Self {
        Self {
            n,
            order,
            data: vec![0.0; n.pow(order as u32)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Entry at 0-based positions.
    pub fn get(&self, pos: &[usize]) -> f64 {
        self.data[self.offset(pos)]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, pos: &[usize]) -> usize {
        debug_assert_eq!(pos.len(), self.order);
        pos.iter().fold(0, |acc, &p| acc * self.n + p)
    }

    pub fn scalar(&self) -> f64 {
        assert_eq!(self.order, 0);
        self.data[0]
    }

    pub fn to_vector(&self) -> DVector<f64> {
        assert_eq!(self.order, 1);
        DVector::from_column_slice(&self.data)
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.order, 2);
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    /// Contracts the last slot with `y`, lowering the order by one.
    pub fn contract_last(&self, y: &[f64]) -> SymArray {
        assert!(self.order > 0);
        let mut out = SymArray::zeros(self.n, self.order - 1);
        for (chunk, slot) in self.data.chunks(self.n).zip(out.data.iter_mut()) {
            *slot = chunk.iter().zip(y).map(|(a, b)| a * b).sum();
        }
        out
    }
}

/// Symmetric tensor `a_{i1...im}` over `n` variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymmetricTensor {
    n: usize,
    m: usize,
    entries: BTreeMap<Vec<usize>, f64>,
}

impl SymmetricTensor {
    pub fn new(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.m
    }

    /// Sets the canonical value for any permutation of `raw`. Zero values are
    /// not stored.
    pub fn set(&mut self, raw: &[usize], value: f64) -> Result<()> {
        check_dim(self.m, raw.len())?;
        let key = canonicalize(raw, self.n)?.indices;
        if value == 0.0 {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
        Ok(())
    }

    pub fn with(mut self, raw: &[usize], value: f64) -> Result<Self> {
        self.set(raw, value)?;
        Ok(self)
    }

    /// Value at any permutation of `raw`; absent entries are zero.
    pub fn get(&self, raw: &[usize]) -> Result<f64> {
        check_dim(self.m, raw.len())?;
        let key = canonicalize(raw, self.n)?.indices;
        Ok(self.entries.get(&key).copied().unwrap_or(0.0))
    }

    /// Stored entries in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (MultisetIndex, f64)> + '_ {
        self.entries.iter().map(|(k, &v)| {
            (
                MultisetIndex {
                    indices: k.clone(),
                    multiplicity: multiplicity(k),
                },
                v,
            )
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.entries.values().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `A = a_{i1...im} y^{i1} ... y^{im}`.
    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        check_dim(self.n, y.len())?;
        Ok(self
            .entries
            .iter()
            .map(|(idx, &c)| multiplicity(idx) as f64 * c * monomial(idx, y))
            .sum())
    }

    /// Saturates `m - k` slots with `y`, returning the dense order-k array
    /// (`A`, `A_i`, `A_ij` or `A_ijk` for k = 0..=3).
    pub fn contract(&self, y: &[f64], k: usize) -> Result<SymArray> {
        check_dim(self.n, y.len())?;
        let max = MAX_CONTRACTION_ORDER.min(self.m);
        if k > max {
            return Err(Error::OrderOutOfRange { k, max });
        }

        // Canonical k-subsets K of each stored multiset I; remainder R = I \ K
        // contributes c * mult(R) * y^R to A_K.
        let mut sparse: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (idx, &c) in &self.entries {
            for fixed in sub_multisets(idx, k) {
                let rest = multiset_difference(idx, &fixed);
                *sparse.entry(fixed).or_insert(0.0) +=
                    c * multiplicity(&rest) as f64 * monomial(&rest, y);
            }
        }

        let mut out = SymArray::zeros(self.n, k);
        let mut pos = vec![0usize; k];
        for slot in out.data.iter_mut() {
            let mut key: Vec<usize> = pos.iter().map(|p| p + 1).collect();
            key.sort_unstable();
            *slot = sparse.get(&key).copied().unwrap_or(0.0);
            advance(&mut pos, self.n);
        }
        Ok(out)
    }

    /// Applies `f` to every stored value, dropping entries that become zero.
    pub fn map_values(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(k, &v)| (k.clone(), f(v)))
            .filter(|(_, v)| *v != 0.0)
            .collect();
        Self {
            n: self.n,
            m: self.m,
            entries,
        }
    }
}

fn monomial(indices: &[usize], y: &[f64]) -> f64 {
    indices.iter().map(|&i| y[i - 1]).product()
}

fn advance(pos: &mut [usize], n: usize) {
    for p in pos.iter_mut().rev() {
        *p += 1;
        if *p < n {
            return;
        }
        *p = 0;
    }
}

/// Distinct sorted sub-multisets of size `k` of a sorted multiset.
fn sub_multisets(sorted: &[usize], k: usize) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    let mut chosen = Vec::with_capacity(k);
    fn recurse(
        sorted: &[usize],
        start: usize,
        k: usize,
        chosen: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<usize>>,
    ) {
        if chosen.len() == k {
            out.insert(chosen.clone());
            return;
        }
        for pos in start..sorted.len() {
            chosen.push(sorted[pos]);
            recurse(sorted, pos + 1, k, chosen, out);
            chosen.pop();
        }
    }
    recurse(sorted, 0, k, &mut chosen, &mut out);
    out
}

fn multiset_difference(sorted: &[usize], remove: &[usize]) -> Vec<usize> {
    let mut rest = Vec::with_capacity(sorted.len() - remove.len());
    let mut r = remove.iter().peekable();
    for &i in sorted {
        if r.peek() == Some(&&i) {
            r.next();
        } else {
            rest.push(i);
        }
    }
    rest
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag() -> SymmetricTensor {
        SymmetricTensor::new(2, 4)
            .with(&[1, 1, 1, 1], 1.0)
            .unwrap()
            .with(&[2, 2, 2, 2], 1.0)
            .unwrap()
    }

    fn berwald_moore() -> SymmetricTensor {
        SymmetricTensor::new(4, 4)
            .with(&[1, 2, 3, 4], 1.0 / 24.0)
            .unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        let idx = canonicalize(&[2, 1, 1, 2], 2).unwrap();
        assert_eq!(idx.indices(), &[1, 1, 2, 2]);
        assert_eq!(idx.multiplicity(), 6);

        let idx = canonicalize(&[1, 1, 1, 1], 2).unwrap();
        assert_eq!(idx.indices(), &[1, 1, 1, 1]);
        assert_eq!(idx.multiplicity(), 1);

        let idx = canonicalize(&[4, 3, 2, 1], 4).unwrap();
        assert_eq!(idx.indices(), &[1, 2, 3, 4]);
        assert_eq!(idx.multiplicity(), 24);

        let again = canonicalize(idx.indices(), 4).unwrap();
        assert_eq!(again, idx);
    }

    #[test]
    fn canonicalize_rejects_out_of_range() {
        assert_eq!(
            canonicalize(&[0, 1], 2),
            Err(Error::IndexOutOfRange { index: 0, n: 2 })
        );
        assert_eq!(
            canonicalize(&[1, 3], 2),
            Err(Error::IndexOutOfRange { index: 3, n: 2 })
        );
    }

    #[test]
    fn eval_examples() {
        assert_eq!(berwald_moore().eval(&[1.0; 4]).unwrap(), 1.0);
        assert_eq!(diag().eval(&[1.0, 2.0]).unwrap(), 17.0);
        assert_eq!(diag().eval(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(
            diag().eval(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn permuted_lookup_hits_canonical_value() {
        let t = SymmetricTensor::new(3, 3).with(&[3, 1, 2], 0.5).unwrap();
        for p in [[1, 2, 3], [2, 3, 1], [3, 2, 1]] {
            assert_eq!(t.get(&p).unwrap(), 0.5);
        }
        assert_eq!(t.get(&[1, 1, 2]).unwrap(), 0.0);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn contract_examples() {
        let y = [1.0, 2.0];
        let a1 = diag().contract(&y, 1).unwrap();
        assert_eq!(a1.data(), &[1.0, 8.0]);
        let a2 = diag().contract(&y, 2).unwrap();
        assert_eq!(a2.data(), &[1.0, 0.0, 0.0, 4.0]);

        let bm = berwald_moore().contract(&[1.0; 4], 1).unwrap();
        for v in bm.data() {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn contract_full_order_is_the_tensor() {
        let t = SymmetricTensor::new(2, 3)
            .with(&[1, 1, 2], 0.7)
            .unwrap()
            .with(&[2, 2, 2], -1.5)
            .unwrap();
        let full = t.contract(&[0.3, 0.9], 3).unwrap();
        assert_eq!(full.get(&[0, 0, 1]), 0.7);
        assert_eq!(full.get(&[1, 0, 0]), 0.7);
        assert_eq!(full.get(&[1, 1, 1]), -1.5);
        assert_eq!(full.get(&[0, 0, 0]), 0.0);
    }

    #[test]
    fn contract_order_guard() {
        assert_eq!(
            diag().contract(&[1.0, 1.0], 4),
            Err(Error::OrderOutOfRange { k: 4, max: 3 })
        );
        let quad = SymmetricTensor::new(2, 2).with(&[1, 2], 1.0).unwrap();
        assert_eq!(
            quad.contract(&[1.0, 1.0], 3),
            Err(Error::OrderOutOfRange { k: 3, max: 2 })
        );
    }

    #[test]
    fn contract_last_chains() {
        let t = berwald_moore();
        let y = [0.4, 1.3, 0.8, 2.1];
        let a2 = t.contract(&y, 2).unwrap();
        let a1 = t.contract(&y, 1).unwrap();
        let chained = a2.contract_last(&y);
        for (a, b) in chained.data().iter().zip(a1.data()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
