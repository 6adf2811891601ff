//! Closed-form sphere moments and exact expectations of (generalized)
//! Veronese tensors under the uniform measure on the unit sphere.

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serializer;

use crate::combinat::{enumerate_pairings, join_block_count, pairing_count, Pairing, SetPartition};
use crate::error::{argument_error, Result};
use crate::invariant_algebra::{InvariantCombination, NPolynomial};
use crate::Limits;

/// Exact rationals are `num_rational::BigRational`: reduced, positive denominator.
pub type Rational = BigRational;

/// `"p/q"`, always with an explicit denominator.
pub fn rational_string(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `"p/q"` or a plain integer.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| argument_error!("{s:?} is not a rational"))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let q = parse_int(q)?;
            if q.is_zero() {
                return Err(argument_error!("{s:?} has a zero denominator"));
            }
            Ok(BigRational::new(parse_int(p)?, q))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

pub(crate) fn serialize_rational<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational_string(x))
}

pub(crate) fn serialize_rationals<S: Serializer>(
    xs: &[BigRational],
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(rational_string))
}

/// `P(n, k) = n (n + 2) ... (n + 2k - 2)`, expanded.
pub fn p_poly(k: usize) -> NPolynomial {
    (0..k).fold(NPolynomial::constant(1), |acc, t| {
        let factor = NPolynomial::from_terms([(1, BigInt::one()), (0, BigInt::from(2 * t))]);
        &acc * &factor
    })
}

fn p_value(k: usize, n: usize) -> BigInt {
    (0..k).map(|t| BigInt::from(n + 2 * t)).product()
}

/// `μ_{k,n} = E(⟨x, y⟩^{2k}) = (2k-1)!! / P(n, k)` for independent uniform unit vectors.
pub fn mu(k: usize, n: usize) -> Result<BigRational> {
    if n == 0 {
        return Err(argument_error!("dimension n must be at least 1"));
    }
    Ok(BigRational::new(pairing_count(k).into(), p_value(k, n)))
}

/// `E(x^{⊗m})` for a uniform unit vector `x` in `R^n`: every pairing gets
/// weight `1 / P(n, m/2)`; odd orders give the zero combination.
pub fn veronese_expectation(m: usize, n: usize, limits: &Limits) -> Result<InvariantCombination> {
    if m == 0 || n == 0 {
        return Err(argument_error!(
            "need m >= 1 and n >= 1, got m = {m}, n = {n}"
        ));
    }
    let mut combination = InvariantCombination::zero(m);
    if m % 2 == 1 {
        return Ok(combination);
    }
    let k = m / 2;
    let weight = BigRational::new(BigInt::one(), p_value(k, n));
    for p in enumerate_pairings(k, limits)? {
        combination.add_term(p, weight.clone())?;
    }
    Ok(combination)
}

/// Expectation of a generalized Veronese tensor with independent uniform unit
/// vectors placed on the blocks of a partition.
#[derive(Debug, Clone, PartialEq)]
pub enum TensorExpectation {
    /// Some block has odd size.
    Zero {
        m: usize,
    },
    NonZero(GeneralizedExpectation),
}

impl TensorExpectation {
    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero { .. })
    }

    pub fn to_combination(&self) -> Result<InvariantCombination> {
        match self {
            Self::Zero { m } => Ok(InvariantCombination::zero(*m)),
            Self::NonZero(e) => e.to_combination(),
        }
    }
}

/// `scalar · (1/|Π|) Σ I(P_1) ⊗ ... ⊗ I(P_l)` over `Π = Π(J_1) × ... × Π(J_l)`,
/// with `I(P_i)` placed on the positions of block `J_i`.
///
/// The product set is kept implicit as one pairing list per block.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedExpectation {
    pub partition: SetPartition,
    /// `Π_i (2k_i - 1)!! / P(n, k_i)`.
    pub scalar: BigRational,
    /// Pairings of `{1, ..., |J_i|}` for each block, in canonical order.
    pub block_pairings: Vec<Vec<Pairing>>,
}

impl GeneralizedExpectation {
    /// `|Π|`.
    pub fn term_count(&self) -> BigUint {
        self.block_pairings
            .iter()
            .map(|ps| BigUint::from(ps.len()))
            .product()
    }

    /// Each element of `Π` as one pairing of `{1, ..., m}`.
    pub fn terms(&self) -> impl Iterator<Item = Pairing> + '_ {
        self.block_pairings
            .iter()
            .multi_cartesian_product()
            .map(move |choice| {
                let pairs = choice
                    .iter()
                    .zip(self.partition.blocks())
                    .flat_map(|(p, block)| {
                        p.pairs()
                            .iter()
                            .map(move |&(a, b)| (block[a - 1], block[b - 1]))
                    });
                Pairing::new(pairs).expect("placed pairs cover every position once")
            })
    }

    pub fn to_combination(&self) -> Result<InvariantCombination> {
        let weight = &self.scalar / BigRational::from_integer(self.term_count().into());
        let mut combination = InvariantCombination::zero(self.partition.order());
        for p in self.terms() {
            combination.add_term(p, weight.clone())?;
        }
        Ok(combination)
    }
}

pub fn generalized_expectation(
    partition: &SetPartition,
    n: usize,
    limits: &Limits,
) -> Result<TensorExpectation> {
    if n == 0 {
        return Err(argument_error!("dimension n must be at least 1"));
    }
    if partition.blocks().iter().any(|b| b.len() % 2 == 1) {
        return Ok(TensorExpectation::Zero {
            m: partition.order(),
        });
    }
    let mut scalar = BigRational::one();
    let mut block_pairings = Vec::with_capacity(partition.len());
    for block in partition.blocks() {
        let k = block.len() / 2;
        scalar *= mu(k, n)?;
        block_pairings.push(enumerate_pairings(k, limits)?);
    }
    Ok(TensorExpectation::NonZero(GeneralizedExpectation {
        partition: partition.clone(),
        scalar,
        block_pairings,
    }))
}

/// `E(⟨x(P), y(Q)⟩) = n^{-(2k - |P ∨ Q|)}` for independent uniform unit vectors
/// placed on the pairs of `P` and of `Q`.
pub fn pair_moment_cor3(p: &Pairing, q: &Pairing, n: usize) -> Result<BigRational> {
    if n == 0 {
        return Err(argument_error!("dimension n must be at least 1"));
    }
    let l = join_block_count(p, q)?;
    let exponent = (p.order() - l) as u32;
    Ok(BigRational::new(
        BigInt::one(),
        BigInt::from(n).pow(exponent),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant_algebra::{
        evaluate_combination_dense, gram_entry, gram_inner, gram_matrix,
    };
    use crate::linalg;
    use crate::tensor_numeric::{inner, placed_tensor, standard_invariant_dense, veronese, Vector};

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    fn pairing(pairs: &[(usize, usize)]) -> Pairing {
        Pairing::new(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn p_poly_examples() {
        assert_eq!(p_poly(1), NPolynomial::monomial(1));
        assert_eq!(
            p_poly(2),
            NPolynomial::from_terms([(2, BigInt::from(1)), (1, BigInt::from(2))])
        );
        assert_eq!(p_poly(3).eval_usize(3), BigInt::from(105));
        for k in 0..6 {
            for n in 1..7 {
                assert_eq!(p_poly(k).eval_usize(n), p_value(k, n));
            }
        }
    }

    #[test]
    fn mu_examples() {
        for n in 1..6 {
            assert_eq!(mu(1, n).unwrap(), rat(1, n as i64));
        }
        assert_eq!(mu(2, 3).unwrap(), rat(1, 5));
        assert_eq!(mu(3, 1).unwrap(), rat(1, 1));
        assert!(mu(2, 0).is_err());
    }

    #[test]
    fn rational_strings() {
        assert_eq!(rational_string(&rat(3, 8)), "3/8");
        assert_eq!(rational_string(&rat(0, 5)), "0/1");
        assert_eq!(rational_string(&rat(-2, 4)), "-1/2");
        assert_eq!(parse_rational("6/16").unwrap(), rat(3, 8));
        assert_eq!(parse_rational("-7").unwrap(), rat(-7, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn veronese_expectation_examples() {
        let limits = Limits::default();
        let e2 = veronese_expectation(2, 4, &limits).unwrap();
        assert_eq!(e2.len(), 1);
        assert_eq!(e2.coefficient(&pairing(&[(1, 2)])), rat(1, 4));
        assert!(veronese_expectation(3, 4, &limits).unwrap().is_zero());
        let e4 = veronese_expectation(4, 2, &limits).unwrap();
        assert_eq!(e4.len(), 3);
        assert!(e4.terms().all(|(_, c)| *c == rat(1, 8)));
    }

    #[test]
    fn generalized_expectation_examples() {
        let limits = Limits::default();
        let single = SetPartition::single_block(4);
        let e = generalized_expectation(&single, 3, &limits).unwrap();
        assert_eq!(
            e.to_combination().unwrap(),
            veronese_expectation(4, 3, &limits).unwrap()
        );

        let two = SetPartition::new(4, vec![vec![1, 2], vec![3, 4]]).unwrap();
        let TensorExpectation::NonZero(e) = generalized_expectation(&two, 3, &limits).unwrap()
        else {
            panic!("even blocks");
        };
        assert_eq!(e.scalar, rat(1, 9));
        assert_eq!(e.term_count(), BigUint::from(1u32));
        assert_eq!(
            e.terms().collect::<Vec<_>>(),
            vec![pairing(&[(1, 2), (3, 4)])]
        );

        let odd = SetPartition::new(5, vec![vec![1, 2, 3], vec![4, 5]]).unwrap();
        assert!(generalized_expectation(&odd, 3, &limits).unwrap().is_zero());
    }

    #[test]
    fn generalized_terms_are_the_refining_pairings() {
        let limits = Limits::default();
        let part = SetPartition::new(6, vec![vec![1, 3, 4, 6], vec![2, 5]]).unwrap();
        let TensorExpectation::NonZero(e) = generalized_expectation(&part, 2, &limits).unwrap()
        else {
            panic!("even blocks");
        };
        let mut terms: Vec<Pairing> = e.terms().collect();
        terms.sort();
        let expected: Vec<Pairing> = enumerate_pairings(3, &limits)
            .unwrap()
            .into_iter()
            .filter(|q| crate::combinat::refines(q, &part).unwrap())
            .collect();
        assert_eq!(terms, expected);
        assert_eq!(e.scalar, mu(2, 2).unwrap() * mu(1, 2).unwrap());
    }

    #[test]
    fn pair_moment_examples() {
        let p = pairing(&[(1, 2), (3, 4)]);
        let q = pairing(&[(1, 3), (2, 4)]);
        for n in 1..5usize {
            let ni = n as i64;
            assert_eq!(pair_moment_cor3(&p, &p, n).unwrap(), rat(1, ni * ni));
            assert_eq!(pair_moment_cor3(&p, &q, n).unwrap(), rat(1, ni * ni * ni));
            let j0 = pairing(&[(1, 2)]);
            assert_eq!(pair_moment_cor3(&j0, &j0, n).unwrap(), rat(1, ni));
        }
        assert!(pair_moment_cor3(&p, &pairing(&[(1, 2)]), 2).is_err());
    }

    #[test]
    fn pair_moment_times_n_power_is_gram_entry() {
        let all = enumerate_pairings(3, &Limits::default()).unwrap();
        for n in 1..4usize {
            let scale = BigRational::from_integer(BigInt::from(n).pow(6));
            for p in &all {
                for q in &all {
                    let lhs = pair_moment_cor3(p, q, n).unwrap() * &scale;
                    let rhs = BigRational::from_integer(gram_entry(p, q).unwrap().eval_usize(n));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn projected_veronese_norm_is_mu() {
        let limits = Limits::default();
        for k in 1..=4 {
            for n in [2usize, 3, 5] {
                let e = veronese_expectation(2 * k, n, &limits).unwrap();
                assert_eq!(gram_inner(&e, &e, n).unwrap(), mu(k, n).unwrap());
            }
        }
    }

    #[test]
    fn normal_equations_hold_with_uniform_weights() {
        let limits = Limits::default();
        for k in 1..=4 {
            let g = gram_matrix(k, &limits).unwrap();
            for n in [1usize, 2, 3, 5] {
                let e = veronese_expectation(2 * k, n, &limits).unwrap();
                let alpha: Vec<BigRational> =
                    g.ordering().iter().map(|p| e.coefficient(p)).collect();
                let lhs = linalg::mat_vec(&g.evaluate(n), &alpha);
                assert!(lhs.iter().all(BigRational::is_one), "k = {k}, n = {n}");
            }
        }
    }

    #[test]
    fn veronese_pairs_with_expectation_to_mu() {
        let limits = Limits::default();
        // (3/13, 4/13, 12/13) is an exact rational point of S^2.
        let x = Vector::new(vec![3.0 / 13.0, 4.0 / 13.0, 12.0 / 13.0]);
        for k in 1..=3 {
            let e = veronese_expectation(2 * k, 3, &limits).unwrap();
            let dense = evaluate_combination_dense(&e, 3, &limits).unwrap();
            let value = inner(&dense, &veronese(&x, 2 * k, &limits).unwrap()).unwrap();
            assert!((value - linalg::to_f64(&mu(k, 3).unwrap())).abs() < 1e-12);
        }
    }

    #[test]
    fn generalized_expectation_dense_matches_placed_invariants() {
        let limits = Limits::default();
        let part = SetPartition::new(4, vec![vec![1, 3], vec![2, 4]]).unwrap();
        let e = generalized_expectation(&part, 2, &limits).unwrap();
        let dense = evaluate_combination_dense(&e.to_combination().unwrap(), 2, &limits).unwrap();
        let expected = standard_invariant_dense(&pairing(&[(1, 3), (2, 4)]), 2, &limits)
            .unwrap()
            .scaled(0.25);
        assert_eq!(dense, expected);
        // Placing e_1 on both blocks pairs to the diagonal entry.
        let e1 = Vector::basis(2, 1);
        let probe = placed_tensor(&[e1.clone(), e1], &part, &limits).unwrap();
        assert_eq!(inner(&dense, &probe).unwrap(), 0.25);
    }
}
