//! Dense order-`m` tensors over `R^n`.
//!
//! This is the brute-force side of every symbolic statement in the crate:
//! standard invariants, placed tensors and Veronese powers are written out
//! entry by entry and compared numerically. Only meant for small `n` and `m`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::combinat::{Pairing, SetPartition};
use crate::error::{argument_error, Result};
use crate::Limits;

/// Tolerance on the Euclidean norm for vectors that are supposed to be unit.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// A point of `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    /// Standard basis vector `e_i` (1-based).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut coords = vec![0.0; n];
        coords[i - 1] = 1.0;
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_TOLERANCE
    }
}

/// Explicit array of `n^m` entries, row-major with `i_1` varying slowest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseTensor {
    n: usize,
    m: usize,
    entries: Vec<f64>,
}

impl DenseTensor {
    pub fn zeros(n: usize, m: usize, limits: &Limits) -> Result<Self> {
        if n == 0 {
            return Err(argument_error!("dimension n must be at least 1"));
        }
        let len = limits.dense_len(n, m)?;
        Ok(Self {
            n,
            m,
            entries: vec![0.0; len],
        })
    }

    pub fn from_entries(n: usize, m: usize, entries: Vec<f64>, limits: &Limits) -> Result<Self> {
        let len = limits.dense_len(n, m)?;
        if n == 0 || entries.len() != len {
            return Err(argument_error!(
                "{} entries do not form a tensor with n = {n}, m = {m}",
                entries.len()
            ));
        }
        Ok(Self { n, m, entries })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Entry at a 1-based index tuple.
    pub fn get(&self, index: &[usize]) -> f64 {
        self.entries[self.flat_index(index)]
    }

    fn flat_index(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.m, "index tuple has the wrong length");
        index.iter().fold(0, |acc, &i| {
            assert!(
                (1..=self.n).contains(&i),
                "index {i} outside 1..={}",
                self.n
            );
            acc * self.n + (i - 1)
        })
    }

    /// Calls `f(flat, tuple)` for every 1-based index tuple in storage order.
    pub fn for_each_index(&self, mut f: impl FnMut(usize, &[usize])) {
        let mut tuple = vec![1; self.m];
        for flat in 0..self.entries.len() {
            f(flat, &tuple);
            for digit in tuple.iter_mut().rev() {
                if *digit < self.n {
                    *digit += 1;
                    break;
                }
                *digit = 1;
            }
        }
    }

    fn check_same_shape(&self, other: &DenseTensor) -> Result<()> {
        if self.n != other.n || self.m != other.m {
            return Err(argument_error!(
                "shape mismatch: (n = {}, m = {}) vs (n = {}, m = {})",
                self.n,
                self.m,
                other.n,
                other.m
            ));
        }
        Ok(())
    }

    /// `self += coefficient * other`.
    pub fn add_scaled(&mut self, coefficient: f64, other: &DenseTensor) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += coefficient * b;
        }
        Ok(())
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.entries.iter_mut().for_each(|e| *e *= factor);
        self
    }

    pub fn max_abs_diff(&self, other: &DenseTensor) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0.0)
    }

    /// Entries as exact integers, if every entry is integral.
    pub fn integer_entries(&self) -> Option<Vec<i64>> {
        self.entries
            .iter()
            .map(|&e| (e.fract() == 0.0 && e.abs() < 9.0e15).then_some(e as i64))
            .collect()
    }

    /// Applies `Q ⊗ ... ⊗ Q` (one factor per tensor slot).
    pub fn apply_orthogonal(&self, q: &DMatrix<f64>) -> Result<DenseTensor> {
        if q.nrows() != self.n || q.ncols() != self.n {
            return Err(argument_error!(
                "{}x{} matrix applied to a tensor over R^{}",
                q.nrows(),
                q.ncols(),
                self.n
            ));
        }
        let n = self.n;
        let mut current = self.entries.clone();
        let mut next = vec![0.0; current.len()];
        for slot in 0..self.m {
            let inner = n.pow((self.m - 1 - slot) as u32);
            let outer = current.len() / (n * inner);
            next.iter_mut().for_each(|e| *e = 0.0);
            for o in 0..outer {
                for i in 0..n {
                    let dst = (o * n + i) * inner;
                    for j in 0..n {
                        let coeff = q[(i, j)];
                        if coeff == 0.0 {
                            continue;
                        }
                        let src = (o * n + j) * inner;
                        for r in 0..inner {
                            next[dst + r] += coeff * current[src + r];
                        }
                    }
                }
            }
            std::mem::swap(&mut current, &mut next);
        }
        Ok(DenseTensor {
            n,
            m: self.m,
            entries: current,
        })
    }
}

/// Dense form of the standard invariant `I(p)`: entry 1 where the index tuple
/// is constant on every pair of `p`, 0 elsewhere.
pub fn standard_invariant_dense(p: &Pairing, n: usize, limits: &Limits) -> Result<DenseTensor> {
    let mut tensor = DenseTensor::zeros(n, p.order(), limits)?;
    let m = p.order();
    let strides: Vec<usize> = (0..m).map(|s| n.pow((m - 1 - s) as u32)).collect();
    let pair_strides: Vec<usize> = p
        .pairs()
        .iter()
        .map(|&(a, b)| strides[a - 1] + strides[b - 1])
        .collect();
    let mut values = vec![0usize; p.k()];
    loop {
        let flat: usize = values.iter().zip(&pair_strides).map(|(v, s)| v * s).sum();
        tensor.entries[flat] = 1.0;
        let Some(pos) = values.iter().rposition(|&v| v + 1 < n) else {
            break;
        };
        values[pos] += 1;
        values[pos + 1..].iter_mut().for_each(|v| *v = 0);
    }
    Ok(tensor)
}

/// Places `vectors[t]` at every position of block `t` of `partition` and takes
/// the resulting decomposable tensor.
pub fn placed_tensor(
    vectors: &[Vector],
    partition: &SetPartition,
    limits: &Limits,
) -> Result<DenseTensor> {
    if vectors.len() != partition.len() {
        return Err(argument_error!(
            "{} vectors for a partition with {} blocks",
            vectors.len(),
            partition.len()
        ));
    }
    let n = vectors.first().map_or(0, Vector::dim);
    if n == 0 || vectors.iter().any(|v| v.dim() != n) {
        return Err(argument_error!("vectors must share one positive dimension"));
    }
    let m = partition.order();
    limits.dense_len(n, m)?;
    let mut entries = vec![1.0];
    for label in partition.labels() {
        let v = vectors[label].coords();
        entries = entries
            .iter()
            .flat_map(|&e| v.iter().map(move |&c| e * c))
            .collect();
    }
    Ok(DenseTensor { n, m, entries })
}

/// `x ⊗ ... ⊗ x` (`m` factors) for a unit vector `x`.
pub fn veronese(x: &Vector, m: usize, limits: &Limits) -> Result<DenseTensor> {
    if !x.is_unit() {
        return Err(argument_error!(
            "Veronese tensors need a unit vector, got norm {}",
            x.norm()
        ));
    }
    placed_tensor(
        std::slice::from_ref(x),
        &SetPartition::single_block(m),
        limits,
    )
}

/// Euclidean inner product of two tensors of the same shape.
pub fn inner(t1: &DenseTensor, t2: &DenseTensor) -> Result<f64> {
    t1.check_same_shape(t2)?;
    Ok(t1.entries.iter().zip(&t2.entries).map(|(a, b)| a * b).sum())
}
