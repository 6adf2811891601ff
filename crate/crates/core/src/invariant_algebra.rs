//! Symbolic layer over pairings: Gram matrices as polynomials in the formal
//! dimension `n`, alternating-sum relations, basis extraction for `k > n`, and
//! the row-structure results for the Gram matrix.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::combinat::{
    apply_permutation, enumerate_pairings, join_block_count, pairing_count, permutation_sign,
    IndexPermutation, Pairing,
};
use crate::error::{argument_error, Error, Result};
use crate::linalg::{self, PivotOrder, SparseRowSpace};
use crate::moments::{mu, rational_string};
use crate::tensor_numeric::{standard_invariant_dense, DenseTensor};
use crate::Limits;

/// Polynomial in `n` with arbitrary-precision integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct NPolynomial {
    coeffs: BTreeMap<u32, BigInt>,
}

impl NPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::from_terms([(0, c.into())])
    }

    /// `n^degree`.
    pub fn monomial(degree: u32) -> Self {
        Self::from_terms([(degree, BigInt::one())])
    }

    /// Builds from `(degree, coefficient)` terms, summing repeated degrees.
    pub fn from_terms(terms: impl IntoIterator<Item = (u32, BigInt)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (d, c) in terms {
            *coeffs.entry(d).or_insert_with(BigInt::zero) += c;
        }
        coeffs.retain(|_, c: &mut BigInt| !c.is_zero());
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn coefficient(&self, degree: u32) -> BigInt {
        self.coeffs.get(&degree).cloned().unwrap_or_default()
    }

    /// Nonzero `(degree, coefficient)` terms in ascending degree.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &BigInt)> {
        self.coeffs.iter().map(|(&d, c)| (d, c))
    }

    /// The exponent `l` if `self == n^l`.
    pub fn as_monomial(&self) -> Option<u32> {
        match self.coeffs.iter().exactly_one() {
            Ok((&d, c)) if c.is_one() => Some(d),
            _ => None,
        }
    }

    pub fn eval(&self, n: &BigInt) -> BigInt {
        // Horner over the dense coefficient range.
        let Some(top) = self.degree() else {
            return BigInt::zero();
        };
        (0..=top)
            .rev()
            .fold(BigInt::zero(), |acc, d| acc * n + self.coefficient(d))
    }

    pub fn eval_usize(&self, n: usize) -> BigInt {
        self.eval(&BigInt::from(n))
    }
}

impl Add for &NPolynomial {
    type Output = NPolynomial;

    fn add(self, rhs: Self) -> NPolynomial {
        NPolynomial::from_terms(self.terms().chain(rhs.terms()).map(|(d, c)| (d, c.clone())))
    }
}

impl Mul for &NPolynomial {
    type Output = NPolynomial;

    fn mul(self, rhs: Self) -> NPolynomial {
        NPolynomial::from_terms(
            self.terms()
                .cartesian_product(rhs.terms().collect::<Vec<_>>())
                .map(|((d1, c1), (d2, c2))| (d1 + d2, c1 * c2)),
        )
    }
}

impl fmt::Display for NPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (d, c)) in self.coeffs.iter().rev().enumerate() {
            let magnitude = c.abs();
            match (i, c.is_negative()) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            match (*d, magnitude.is_one()) {
                (0, _) => write!(f, "{magnitude}")?,
                (d, true) => write!(f, "n^{d}")?,
                (d, false) => write!(f, "{magnitude}*n^{d}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for NPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Formal linear combination of standard invariants with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantCombination {
    m: usize,
    terms: BTreeMap<Pairing, BigRational>,
}

impl InvariantCombination {
    /// The zero combination in order `m`.
    pub fn zero(m: usize) -> Self {
        Self {
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.m
    }

    /// Adds `coefficient · I(p)`, merging with an existing term.
    pub fn add_term(&mut self, p: Pairing, coefficient: BigRational) -> Result<()> {
        if p.order() != self.m {
            return Err(argument_error!(
                "pairing of order {} added to a combination of order {}",
                p.order(),
                self.m
            ));
        }
        let entry = self.terms.entry(p).or_insert_with(BigRational::zero);
        *entry += coefficient;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
        Ok(())
    }

    pub fn coefficient(&self, p: &Pairing) -> BigRational {
        self.terms.get(p).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Pairing, &BigRational)> {
        self.terms.iter()
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Serialize for InvariantCombination {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.terms.len()))?;
        for (p, c) in &self.terms {
            let key = serde_json::to_string(p).map_err(serde::ser::Error::custom)?;
            map.serialize_entry(&key, &rational_string(c))?;
        }
        map.end()
    }
}

/// Gram matrix of the standard invariants of order `2k`, indexed by the
/// canonical pairing order. Every entry is a monomial `n^l`; only the
/// exponents are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramMatrix {
    k: usize,
    ordering: Vec<Pairing>,
    exponents: Vec<u8>,
}

impl GramMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ordering(&self) -> &[Pairing] {
        &self.ordering
    }

    /// Number of rows (`(2k-1)!!`).
    pub fn size(&self) -> usize {
        self.ordering.len()
    }

    pub fn exponent(&self, i: usize, j: usize) -> u32 {
        u32::from(self.exponents[i * self.size() + j])
    }

    pub fn entry(&self, i: usize, j: usize) -> NPolynomial {
        NPolynomial::monomial(self.exponent(i, j))
    }

    pub fn row_exponents(&self, i: usize) -> &[u8] {
        let size = self.size();
        &self.exponents[i * size..(i + 1) * size]
    }

    /// Entries evaluated at an integer dimension.
    pub fn evaluate(&self, n: usize) -> linalg::IntMatrix {
        let powers: Vec<BigInt> = (0..=self.k as u32)
            .map(|l| BigInt::from(n).pow(l))
            .collect();
        (0..self.size())
            .map(|i| {
                self.row_exponents(i)
                    .iter()
                    .map(|&l| powers[usize::from(l)].clone())
                    .collect()
            })
            .collect()
    }

    /// Symbolic JSON form: entries as `"n^l"` strings.
    pub fn symbolic_json(&self) -> serde_json::Value {
        let entries: Vec<Vec<String>> = (0..self.size())
            .map(|i| {
                self.row_exponents(i)
                    .iter()
                    .map(|l| format!("n^{l}"))
                    .collect()
            })
            .collect();
        serde_json::json!({ "k": self.k, "ordering": self.ordering, "entries": entries })
    }

    /// Evaluated JSON form: entries as decimal integer strings.
    pub fn evaluated_json(&self, n: usize) -> serde_json::Value {
        let entries: Vec<Vec<String>> = self
            .evaluate(n)
            .into_iter()
            .map(|row| row.into_iter().map(|v| v.to_string()).collect())
            .collect();
        serde_json::json!({ "k": self.k, "n": n, "ordering": self.ordering, "entries": entries })
    }
}

/// `⟨I(p), I(q)⟩ = n^{|p ∨ q|}`.
pub fn gram_entry(p: &Pairing, q: &Pairing) -> Result<NPolynomial> {
    Ok(NPolynomial::monomial(join_block_count(p, q)? as u32))
}

fn gram_row(ordering: &[Pairing], i: usize) -> Vec<u8> {
    ordering
        .iter()
        .map(|q| join_block_count(&ordering[i], q).expect("same order") as u8)
        .collect()
}

pub fn gram_matrix(k: usize, limits: &Limits) -> Result<GramMatrix> {
    limits.check_gram_k(k)?;
    let ordering = enumerate_pairings(k, limits)?;
    let exponents = (0..ordering.len())
        .into_par_iter()
        .flat_map_iter(|i| gram_row(&ordering, i))
        .collect();
    Ok(GramMatrix {
        k,
        ordering,
        exponents,
    })
}

/// Histogram `exponent -> count` of one row of exponents.
fn row_profile(row: &[u8]) -> BTreeMap<u32, usize> {
    let mut profile = BTreeMap::new();
    for &l in row {
        *profile.entry(u32::from(l)).or_insert(0) += 1;
    }
    profile
}

fn profile_polynomial(profile: &BTreeMap<u32, usize>) -> NPolynomial {
    NPolynomial::from_terms(profile.iter().map(|(&l, &count)| (l, BigInt::from(count))))
}

/// The common row sum of the Gram matrix, as a polynomial in `n`.
///
/// Every row is summed; rows that disagree indicate a broken enumeration and
/// are reported as an internal error.
pub fn gram_row_sum(k: usize, limits: &Limits) -> Result<NPolynomial> {
    limits.check_gram_k(k)?;
    let ordering = enumerate_pairings(k, limits)?;
    let profiles: Vec<BTreeMap<u32, usize>> = (0..ordering.len())
        .into_par_iter()
        .map(|i| row_profile(&gram_row(&ordering, i)))
        .collect();
    let first = &profiles[0];
    if let Some(bad) = profiles.iter().position(|p| p != first) {
        return Err(Error::Internal(format!(
            "Gram row {bad} sums to {} but row 0 sums to {}",
            profile_polynomial(&profiles[bad]),
            profile_polynomial(first)
        )));
    }
    Ok(profile_polynomial(first))
}

/// Exact value of `⟨a, b⟩` for two combinations, evaluated at dimension `n`.
pub fn gram_inner(
    a: &InvariantCombination,
    b: &InvariantCombination,
    n: usize,
) -> Result<BigRational> {
    if a.order() != b.order() {
        return Err(argument_error!(
            "combinations of order {} and {} cannot be paired",
            a.order(),
            b.order()
        ));
    }
    let n = BigInt::from(n);
    let mut total = BigRational::zero();
    for (p, cp) in a.terms() {
        for (q, cq) in b.terms() {
            let l = join_block_count(p, q)? as u32;
            total += cp * cq * BigRational::from_integer(n.pow(l));
        }
    }
    Ok(total)
}

/// Alternating sum over permutations of even positions applied to
/// `(1,2)(3,4)...(2k-1,2k)`.
///
/// `even_positions` restricts the permuted positions (default: all of
/// `2, 4, ..., 2k`). The result is the zero tensor at every dimension below
/// the number of permuted positions.
pub fn sft_relation(k: usize, even_positions: Option<&[usize]>) -> Result<InvariantCombination> {
    if k < 2 {
        return Err(argument_error!("alternating relations need k >= 2"));
    }
    let m = 2 * k;
    let positions: Vec<usize> = match even_positions {
        Some(ps) => ps.to_vec(),
        None => (1..=k).map(|t| 2 * t).collect(),
    };
    if positions.iter().any(|&p| p == 0 || p > m || p % 2 != 0) || !positions.iter().all_unique() {
        return Err(argument_error!(
            "{positions:?} is not a set of distinct even positions in 1..={m}"
        ));
    }
    let p0 = Pairing::standard(k)?;
    let mut relation = InvariantCombination::zero(m);
    for images in positions.iter().copied().permutations(positions.len()) {
        let mut full: Vec<usize> = (1..=m).collect();
        for (&from, &to) in positions.iter().zip(&images) {
            full[from - 1] = to;
        }
        let sigma = IndexPermutation::new(full)?;
        let sign = BigRational::from_integer(permutation_sign(&sigma).into());
        relation.add_term(apply_permutation(&sigma, &p0)?, sign)?;
    }
    Ok(relation)
}

/// `Σ c_P · I(P)` written out densely at dimension `n`.
pub fn evaluate_combination_dense(
    c: &InvariantCombination,
    n: usize,
    limits: &Limits,
) -> Result<DenseTensor> {
    let mut total = DenseTensor::zeros(n, c.order(), limits)?;
    for (p, coeff) in c.terms() {
        let dense = standard_invariant_dense(p, n, limits)?;
        total.add_scaled(linalg::to_f64(coeff), &dense)?;
    }
    Ok(total)
}

/// Same as [`evaluate_combination_dense`] but with exact rational entries.
pub fn evaluate_combination_exact(
    c: &InvariantCombination,
    n: usize,
    limits: &Limits,
) -> Result<Vec<BigRational>> {
    let len = limits.dense_len(n, c.order())?;
    let mut entries = vec![BigRational::zero(); len];
    for (p, coeff) in c.terms() {
        let dense = standard_invariant_dense(p, n, limits)?;
        for (entry, &x) in entries.iter_mut().zip(dense.entries()) {
            if x != 0.0 {
                *entry += coeff;
            }
        }
    }
    Ok(entries)
}

/// Greedy basis of the invariant space: walks the canonical pairing order and
/// keeps each `I(P)` whose dense vector at dimension `n` is not in the span of
/// the ones already kept (exact integer rank test).
pub fn extract_basis(k: usize, n: usize, limits: &Limits) -> Result<Vec<Pairing>> {
    let mut space = SparseRowSpace::new();
    let mut basis = Vec::new();
    for p in enumerate_pairings(k, limits)? {
        let dense = standard_invariant_dense(&p, n, limits)?;
        let support = dense
            .entries()
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0.0)
            .map(|(i, _)| (i, 1i128))
            .collect();
        if space.insert(support)? {
            basis.push(p);
        }
    }
    Ok(basis)
}

/// Outcome of solving `G_0 s = 1` on an extracted basis and comparing
/// `Σ s_i I(P_i)` with `μ_{k,n} A_{2k}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Corollary1Report {
    pub k: usize,
    pub n: usize,
    pub basis: Vec<Pairing>,
    #[serde(serialize_with = "crate::moments::serialize_rationals")]
    pub row_sums: Vec<BigRational>,
    #[serde(serialize_with = "crate::moments::serialize_rational")]
    pub mu: BigRational,
    /// Largest absolute entry of the exact dense difference.
    #[serde(serialize_with = "crate::moments::serialize_rational")]
    pub residual: BigRational,
    pub residual_f64: f64,
}

pub fn corollary1_identity(k: usize, n: usize, limits: &Limits) -> Result<Corollary1Report> {
    if n == 0 {
        return Err(argument_error!("dimension n must be at least 1"));
    }
    let basis = extract_basis(k, n, limits)?;
    let big_n = BigInt::from(n);
    let g0: linalg::IntMatrix = basis
        .iter()
        .map(|p| {
            basis
                .iter()
                .map(|q| Ok(gram_entry(p, q)?.eval(&big_n)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    if linalg::rank(&g0)? != basis.len() {
        return Err(Error::Internal(format!(
            "Gram matrix of the extracted basis is singular at k = {k}, n = {n}"
        )));
    }
    let ones = vec![BigInt::one(); basis.len()];
    let row_sums = linalg::solve(&g0, &ones, PivotOrder::Natural)?
        .ok_or_else(|| Error::Internal("nonsingular Gram system reported inconsistent".into()))?;

    let mut lhs = InvariantCombination::zero(2 * k);
    for (p, s) in basis.iter().zip(&row_sums) {
        lhs.add_term(p.clone(), s.clone())?;
    }
    let mu = mu(k, n)?;
    let average_weight = &mu / BigRational::from_integer(pairing_count(k).into());
    let mut rhs = InvariantCombination::zero(2 * k);
    for p in enumerate_pairings(k, limits)? {
        rhs.add_term(p, average_weight.clone())?;
    }
    let lhs_dense = evaluate_combination_exact(&lhs, n, limits)?;
    let rhs_dense = evaluate_combination_exact(&rhs, n, limits)?;
    let residual = lhs_dense
        .iter()
        .zip(&rhs_dense)
        .map(|(a, b)| (a - b).abs())
        .max()
        .unwrap_or_else(BigRational::zero);
    Ok(Corollary1Report {
        k,
        n,
        basis,
        residual_f64: linalg::to_f64(&residual),
        row_sums,
        mu,
        residual,
    })
}

/// Row-by-row comparison between the Gram matrix and the Kronecker product
/// `M_1 ⊗ M_3 ⊗ ... ⊗ M_{2k-1}` (`M_t`: diagonal `n`, off-diagonal `1`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Corollary2Report {
    pub k: usize,
    /// `(exponent, count)` profile shared by every row of the Kronecker product.
    pub kronecker_profile: Vec<(u32, usize)>,
    /// Whether Gram row `i` has the same entry multiset as Kronecker row `i`.
    pub rows: Vec<bool>,
    pub passed: bool,
}

/// Exponents of `n` along row `row` of `M_1 ⊗ M_3 ⊗ ... ⊗ M_{2k-1}`.
pub fn kronecker_row_exponents(k: usize, row: usize) -> Vec<u8> {
    let sizes: Vec<usize> = (1..=k).map(|t| 2 * t - 1).collect();
    let total: usize = sizes.iter().product();
    // Mixed-radix digits, first factor most significant.
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut out = vec![0; sizes.len()];
        for (slot, &size) in sizes.iter().enumerate().rev() {
            out[slot] = idx % size;
            idx /= size;
        }
        out
    };
    let row_digits = digits(row);
    (0..total)
        .map(|col| {
            digits(col)
                .iter()
                .zip(&row_digits)
                .filter(|(a, b)| a == b)
                .count() as u8
        })
        .collect()
}

pub fn corollary2_check(k: usize, limits: &Limits) -> Result<Corollary2Report> {
    limits.check_gram_k(k)?;
    let ordering = enumerate_pairings(k, limits)?;
    let results: Vec<(bool, BTreeMap<u32, usize>)> = (0..ordering.len())
        .into_par_iter()
        .map(|i| {
            let kron = row_profile(&kronecker_row_exponents(k, i));
            (row_profile(&gram_row(&ordering, i)) == kron, kron)
        })
        .collect();
    let reference = results[0].1.clone();
    let uniform = results.iter().all(|(_, kron)| *kron == reference);
    let rows: Vec<bool> = results.iter().map(|(ok, _)| *ok).collect();
    Ok(Corollary2Report {
        k,
        kronecker_profile: reference.into_iter().collect(),
        passed: uniform && rows.iter().all(|&ok| ok),
        rows,
    })
}
