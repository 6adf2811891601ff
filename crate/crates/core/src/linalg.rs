//! Exact linear algebra over the integers and rationals.
//!
//! Square and rectangular systems with integer coefficients are reduced by
//! fraction-free (Bareiss) elimination; every intermediate entry is a minor
//! of the input, so each division is exact. Rationals only appear during
//! back-substitution.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type IntMatrix = Vec<Vec<BigInt>>;

/// Order in which columns are offered as pivots.
///
/// For a singular but consistent system the two orders generally return
/// different particular solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotOrder {
    #[default]
    Natural,
    Reversed,
}

struct Echelon {
    rows: IntMatrix,
    pivots: Vec<usize>,
}

fn check_rectangular(a: &[Vec<BigInt>]) -> Result<usize> {
    let ncols = a.first().map_or(0, Vec::len);
    if a.iter().any(|row| row.len() != ncols) {
        return Err(Error::Argument("ragged matrix".into()));
    }
    Ok(ncols)
}

/// Bareiss elimination of `rows`, pivoting only on the columns in `columns`.
fn bareiss(mut rows: IntMatrix, columns: &[usize]) -> Result<Echelon> {
    let nrows = rows.len();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for &c in columns {
        if r == nrows {
            break;
        }
        let Some(found) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, found);
        let (head, tail) = rows.split_at_mut(r + 1);
        let pivot_row = &head[r];
        let pivot = &pivot_row[c];
        for row in tail.iter_mut() {
            let factor = row[c].clone();
            for (j, entry) in row.iter_mut().enumerate() {
                let numer = pivot * &*entry - &factor * &pivot_row[j];
                let (q, rem) = numer.div_rem(&prev);
                if !rem.is_zero() {
                    return Err(Error::Internal("inexact Bareiss division".into()));
                }
                *entry = q;
            }
        }
        prev = rows[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    Ok(Echelon { rows, pivots })
}

/// Rank of an integer matrix.
pub fn rank(a: &[Vec<BigInt>]) -> Result<usize> {
    let ncols = check_rectangular(a)?;
    let columns: Vec<usize> = (0..ncols).collect();
    Ok(bareiss(a.to_vec(), &columns)?.pivots.len())
}

/// Solves `a · x = b` exactly.
///
/// Returns `None` when the system is inconsistent. When `a` is singular the
/// free variables are set to zero, so the particular solution depends on
/// `order`.
pub fn solve(
    a: &[Vec<BigInt>],
    b: &[BigInt],
    order: PivotOrder,
) -> Result<Option<Vec<BigRational>>> {
    let ncols = check_rectangular(a)?;
    if a.len() != b.len() {
        return Err(Error::Argument(format!(
            "{} equations but {} right-hand sides",
            a.len(),
            b.len()
        )));
    }
    let augmented: IntMatrix = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut row = row.clone();
            row.push(rhs.clone());
            row
        })
        .collect();
    let columns: Vec<usize> = match order {
        PivotOrder::Natural => (0..ncols).collect(),
        PivotOrder::Reversed => (0..ncols).rev().collect(),
    };
    let Echelon { rows, pivots } = bareiss(augmented, &columns)?;
    let rank = pivots.len();
    if rows[rank..].iter().any(|row| !row[ncols].is_zero()) {
        return Ok(None);
    }
    let mut x = vec![BigRational::zero(); ncols];
    for (r, &c) in pivots.iter().enumerate().rev() {
        let row = &rows[r];
        let mut acc = BigRational::from_integer(row[ncols].clone());
        for (j, coeff) in row[..ncols].iter().enumerate() {
            if j != c && !coeff.is_zero() && !x[j].is_zero() {
                acc -= &x[j] * coeff;
            }
        }
        x[c] = acc / BigRational::from_integer(row[c].clone());
    }
    Ok(Some(x))
}

/// `a · x` with an integer matrix and a rational vector.
pub fn mat_vec(a: &[Vec<BigInt>], x: &[BigRational]) -> Vec<BigRational> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .filter(|(c, _)| !c.is_zero())
                .fold(BigRational::zero(), |acc, (c, v)| acc + v * c)
        })
        .collect()
}

/// Incrementally grown row space of sparse integer vectors, used for exact
/// independence tests on long, mostly-zero vectors.
#[derive(Debug, Default, Clone)]
pub struct SparseRowSpace {
    // (pivot column, row sorted by column); each row is zero at the pivots of
    // the rows before it.
    rows: Vec<(usize, Vec<(usize, i128)>)>,
}

impl SparseRowSpace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v` if it is outside the current span; returns whether it was added.
    pub fn insert(&mut self, mut v: Vec<(usize, i128)>) -> Result<bool> {
        v.retain(|&(_, x)| x != 0);
        v.sort_unstable_by_key(|&(c, _)| c);
        for (pivot, row) in &self.rows {
            let Ok(pos) = v.binary_search_by_key(pivot, |&(c, _)| c) else {
                continue;
            };
            let factor = v[pos].1;
            let lead = row[row
                .binary_search_by_key(pivot, |&(c, _)| c)
                .expect("pivot present")]
            .1;
            v = combine(lead, &v, factor, row)?;
        }
        match v.first() {
            None => Ok(false),
            Some(&(pivot, _)) => {
                self.rows.push((pivot, v));
                Ok(true)
            }
        }
    }
}

/// `a·x - b·y`, divided by the gcd of the result.
fn combine(
    a: i128,
    x: &[(usize, i128)],
    b: i128,
    y: &[(usize, i128)],
) -> Result<Vec<(usize, i128)>> {
    let overflow = || Error::Internal("integer overflow in sparse elimination".into());
    let mul = |s: i128, t: i128| s.checked_mul(t).ok_or_else(overflow);
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let (col, value) = match (x.get(i), y.get(j)) {
            (Some(&(cx, vx)), Some(&(cy, _))) if cx < cy => {
                i += 1;
                (cx, mul(a, vx)?)
            }
            (Some(&(cx, vx)), Some(&(cy, vy))) if cx == cy => {
                i += 1;
                j += 1;
                (
                    cx,
                    mul(a, vx)?.checked_sub(mul(b, vy)?).ok_or_else(overflow)?,
                )
            }
            (_, Some(&(cy, vy))) => {
                j += 1;
                (cy, mul(b, vy)?.checked_neg().ok_or_else(overflow)?)
            }
            (Some(&(cx, vx)), None) => {
                i += 1;
                (cx, mul(a, vx)?)
            }
            (None, None) => unreachable!(),
        };
        if value != 0 {
            out.push((col, value));
        }
    }
    let g = out.iter().fold(0i128, |g, &(_, v)| g.gcd(&v));
    if g > 1 {
        out.iter_mut().for_each(|(_, v)| *v /= g);
    }
    Ok(out)
}

/// Nearest `f64` to an exact rational.
pub fn to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
