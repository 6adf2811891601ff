//! Moments `E(x_{i1 j1} ... x_{im jm})` of entries of a Haar-random orthogonal
//! matrix.
//!
//! Two evaluators are provided and always kept apart:
//!
//! * [`theorem3_moment`] groups factors by row index and multiplies one
//!   single-column projection per group. It treats distinct columns of the
//!   matrix as if they were independent.
//! * [`exact_moment`] solves the normal equations `G α = b` over all pairings
//!   of `{1, ..., m}`, with `b_P = 1` iff the row sequence is constant on the
//!   pairs of `P`, and returns `Σ_Q α_Q Δ_Q(columns)`.
//!
//! They coincide when the query uses a single row index and differ in
//! general; [`compare_methods`] puts both next to a Monte Carlo estimate.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::combinat::{enumerate_pairings, Pairing, SetPartition};
use crate::error::{argument_error, Error, Result};
use crate::invariant_algebra::gram_entry;
use crate::linalg::{self, to_f64, PivotOrder};
use crate::moments::{mu, rational_string, serialize_rational};
use crate::montecarlo::{
    estimate_query_moment, Estimate, SamplerConfig, ACCEPTANCE_SIGMAS, ARBITRATION_SIGMAS,
};
use crate::Limits;

/// A product of matrix entries `x_{i j}` (1-based), in dimension `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MomentQuery {
    n: usize,
    factors: Vec<(usize, usize)>,
}

impl MomentQuery {
    pub fn new(n: usize, factors: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(argument_error!("dimension n must be at least 1"));
        }
        if factors.is_empty() {
            return Err(argument_error!("a moment query needs at least one factor"));
        }
        if let Some(&(i, j)) = factors
            .iter()
            .find(|&&(i, j)| !(1..=n).contains(&i) || !(1..=n).contains(&j))
        {
            return Err(argument_error!(
                "factor x_({i},{j}) has an index outside 1..={n}"
            ));
        }
        Ok(Self { n, factors })
    }

    /// Parses `"i,j;i,j;..."`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let factors = text
            .split(';')
            .map(|item| {
                let (i, j) = item
                    .split_once(',')
                    .ok_or_else(|| argument_error!("factor {item:?} is not of the form i,j"))?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| argument_error!("{s:?} is not a positive index"))
                };
                Ok((parse(i)?, parse(j)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, factors)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> &[(usize, usize)] {
        &self.factors
    }

    /// Total degree `m`.
    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn rows(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.0).collect()
    }

    pub fn columns(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.1).collect()
    }

    /// Swaps row and column indices of every factor.
    pub fn transpose(&self) -> Self {
        Self {
            n: self.n,
            factors: self.factors.iter().map(|&(i, j)| (j, i)).collect(),
        }
    }
}

impl fmt::Display for MomentQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .factors
            .iter()
            .map(|(i, j)| format!("{i},{j}"))
            .collect();
        write!(f, "{}", items.join(";"))
    }
}

impl Serialize for MomentQuery {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.factors.iter().map(|&(i, j)| [i, j]))
    }
}

/// Query positions grouped by row index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupedQuery {
    /// Positions sharing a row index, blocks in order of first occurrence.
    pub first_partition: SetPartition,
    /// Row index of each block.
    pub row_indices: Vec<usize>,
    /// Column indices of each block, in original position order.
    pub sigma_blocks: Vec<Vec<usize>>,
}

impl GroupedQuery {
    /// Column sequence after stable reordering by block.
    pub fn sigma(&self) -> Vec<usize> {
        self.sigma_blocks.concat()
    }
}

pub fn group_by_first_index(q: &MomentQuery) -> GroupedQuery {
    let rows = q.rows();
    let first_partition = SetPartition::from_labels(&rows);
    let row_indices = first_partition
        .blocks()
        .iter()
        .map(|b| rows[b[0] - 1])
        .collect();
    let sigma_blocks = first_partition
        .blocks()
        .iter()
        .map(|b| b.iter().map(|&pos| q.factors[pos - 1].1).collect())
        .collect();
    GroupedQuery {
        first_partition,
        row_indices,
        sigma_blocks,
    }
}

/// 1 iff `seq` is constant on every pair of `p`.
pub fn delta(p: &Pairing, seq: &[usize]) -> Result<u8> {
    Ok(u8::from(p.is_constant_on_pairs(seq)?))
}

/// Product over row groups of `(#pairings P of the group with Δ_P(σ_i) = 1) / P(n, k_i)`,
/// zero if any group has odd size.
pub fn theorem3_moment(q: &MomentQuery, limits: &Limits) -> Result<BigRational> {
    let grouped = group_by_first_index(q);
    if grouped.sigma_blocks.iter().any(|s| s.len() % 2 == 1) {
        return Ok(BigRational::zero());
    }
    let mut value = BigRational::one();
    for sigma in &grouped.sigma_blocks {
        let k = sigma.len() / 2;
        let mut satisfied = 0u64;
        for p in enumerate_pairings(k, limits)? {
            satisfied += u64::from(delta(&p, sigma)?);
        }
        if satisfied == 0 {
            return Ok(BigRational::zero());
        }
        // (2k-1)!!/P(n,k) times the average of the deltas over the (2k-1)!! pairings.
        let average = BigRational::new(satisfied.into(), crate::combinat::pairing_count(k).into());
        value *= mu(k, q.n())? * average;
    }
    Ok(value)
}

/// Normal-equation evaluator for a fixed `(n, m)`, caching the Gram matrix and
/// every solved right-hand side.
#[derive(Debug)]
pub struct ExactMomentSolver {
    n: usize,
    m: usize,
    order: PivotOrder,
    pairings: Vec<Pairing>,
    gram: linalg::IntMatrix,
    solutions: HashMap<Vec<bool>, Vec<BigRational>>,
}

impl ExactMomentSolver {
    pub fn new(n: usize, m: usize, limits: &Limits, order: PivotOrder) -> Result<Self> {
        if n == 0 || m == 0 || m % 2 == 1 {
            return Err(argument_error!(
                "need n >= 1 and an even m >= 2, got n = {n}, m = {m}"
            ));
        }
        limits.check_solve_k(m / 2)?;
        let pairings = enumerate_pairings(m / 2, limits)?;
        let big_n = BigInt::from(n);
        let gram = pairings
            .iter()
            .map(|p| {
                pairings
                    .iter()
                    .map(|q| Ok(gram_entry(p, q)?.eval(&big_n)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            n,
            m,
            order,
            pairings,
            gram,
            solutions: HashMap::new(),
        })
    }

    fn deltas(&self, seq: &[usize]) -> Vec<bool> {
        self.pairings
            .iter()
            .map(|p| {
                p.is_constant_on_pairs(seq)
                    .expect("sequence length checked")
            })
            .collect()
    }

    /// Any solution of `G α = b` for the delta vector of the row sequence.
    pub fn weights(&mut self, rows: &[usize]) -> Result<Vec<BigRational>> {
        let b = self.deltas(rows);
        if let Some(alpha) = self.solutions.get(&b) {
            return Ok(alpha.clone());
        }
        let rhs: Vec<BigInt> = b.iter().map(|&x| BigInt::from(u8::from(x))).collect();
        let alpha = linalg::solve(&self.gram, &rhs, self.order)?.ok_or_else(|| {
            Error::Internal(format!(
                "normal equations for rows {rows:?} are inconsistent at n = {}",
                self.n
            ))
        })?;
        self.solutions.insert(b, alpha.clone());
        Ok(alpha)
    }

    pub fn moment(&mut self, q: &MomentQuery) -> Result<BigRational> {
        if q.n() != self.n || q.degree() != self.m {
            return Err(argument_error!(
                "query with n = {}, m = {} given to a solver for n = {}, m = {}",
                q.n(),
                q.degree(),
                self.n,
                self.m
            ));
        }
        let rows = q.rows();
        let cols = self.deltas(&q.columns());
        if self.deltas(&rows).iter().all(|&x| !x) || cols.iter().all(|&x| !x) {
            return Ok(BigRational::zero());
        }
        let alpha = self.weights(&rows)?;
        Ok(alpha
            .iter()
            .zip(&cols)
            .filter(|(_, &c)| c)
            .fold(BigRational::zero(), |acc, (a, _)| acc + a))
    }
}

/// Exact Haar moment via the normal equations. Odd degrees are zero
/// (`X -> -X` preserves Haar measure).
pub fn exact_moment(q: &MomentQuery, limits: &Limits) -> Result<BigRational> {
    exact_moment_with(q, limits, PivotOrder::Natural)
}

pub fn exact_moment_with(
    q: &MomentQuery,
    limits: &Limits,
    order: PivotOrder,
) -> Result<BigRational> {
    if q.degree() % 2 == 1 {
        return Ok(BigRational::zero());
    }
    ExactMomentSolver::new(q.n(), q.degree(), limits, order)?.moment(q)
}

/// Expands `[(i, j, e), ...]` into the query `x_{ij}^e ...`.
pub fn corollary4_query(n: usize, factors: &[(usize, usize, usize)]) -> Result<MomentQuery> {
    let mut rows: Vec<usize> = factors.iter().map(|s| s.0).collect();
    rows.sort_unstable();
    if rows.windows(2).any(|w| w[0] == w[1]) {
        return Err(argument_error!(
            "row indices must be pairwise distinct; use theorem3_moment for repeated rows"
        ));
    }
    if let Some(&(i, j, e)) = factors.iter().find(|s| s.2 == 0 || s.2 % 2 == 1) {
        return Err(argument_error!(
            "exponent {e} of x_({i},{j}) must be even and positive"
        ));
    }
    let expanded = factors
        .iter()
        .flat_map(|&(i, j, e)| std::iter::repeat_n((i, j), e))
        .collect();
    MomentQuery::new(n, expanded)
}

/// `Π_t (2k_t - 1)!! / P(n, k_t)` for `Π_t x_{i_t j_t}^{2k_t}` with distinct rows.
pub fn corollary4_moment(n: usize, factors: &[(usize, usize, usize)]) -> Result<BigRational> {
    corollary4_query(n, factors)?;
    factors.iter().try_fold(
        BigRational::one(),
        |acc, &(_, _, e)| Ok(acc * mu(e / 2, n)?),
    )
}

/// Which evaluator a Monte Carlo run supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Both evaluators give the same value and the estimate agrees with it.
    Concordant,
    /// Both evaluators agree but the estimate does not.
    Discordant,
    SupportsExact,
    SupportsTheorem3,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodComparison {
    pub query: MomentQuery,
    pub n: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub theorem3: BigRational,
    #[serde(serialize_with = "serialize_rational")]
    pub exact: BigRational,
    pub mc: McSummary,
    pub theorem3_z: f64,
    pub exact_z: f64,
    pub theorem3_agrees: bool,
    pub exact_agrees: bool,
    pub verdict: Verdict,
}

/// A Monte Carlo estimate together with the run parameters that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McSummary {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McSummary {
    pub fn new(estimate: Estimate, config: &SamplerConfig) -> Self {
        Self {
            mean: estimate.mean,
            stderr: estimate.stderr,
            samples: estimate.samples,
            seed: config.seed,
            workers: config.workers,
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            mean: self.mean,
            stderr: self.stderr,
            samples: self.samples,
        }
    }
}

fn verdict(theorem3: &BigRational, exact: &BigRational, mc: &Estimate) -> Verdict {
    let (t, e) = (to_f64(theorem3), to_f64(exact));
    if theorem3 == exact {
        return if mc.agrees_with(e, ACCEPTANCE_SIGMAS) {
            Verdict::Concordant
        } else {
            Verdict::Discordant
        };
    }
    let (zt, ze) = (mc.z_score(t), mc.z_score(e));
    match (ze < ACCEPTANCE_SIGMAS, zt < ACCEPTANCE_SIGMAS) {
        (true, false) if zt > ARBITRATION_SIGMAS => Verdict::SupportsExact,
        (false, true) if ze > ARBITRATION_SIGMAS => Verdict::SupportsTheorem3,
        _ => Verdict::Inconclusive,
    }
}

/// Evaluates a query by both exact routes and by Monte Carlo.
pub fn compare_methods(
    q: &MomentQuery,
    config: &SamplerConfig,
    limits: &Limits,
) -> Result<MethodComparison> {
    let theorem3 = theorem3_moment(q, limits)?;
    let exact = exact_moment(q, limits)?;
    let estimate = estimate_query_moment(q, config)?;
    Ok(MethodComparison {
        query: q.clone(),
        n: q.n(),
        theorem3_z: estimate.z_score(to_f64(&theorem3)),
        exact_z: estimate.z_score(to_f64(&exact)),
        theorem3_agrees: estimate.agrees_with(to_f64(&theorem3), ACCEPTANCE_SIGMAS),
        exact_agrees: estimate.agrees_with(to_f64(&exact), ACCEPTANCE_SIGMAS),
        verdict: verdict(&theorem3, &exact, &estimate),
        mc: McSummary::new(estimate, config),
        theorem3,
        exact,
    })
}

impl MethodComparison {
    pub fn summary(&self) -> String {
        format!(
            "{} at n = {}: theorem3 = {}, exact = {}, mc = {:.6} ± {:.6} ({:?})",
            self.query,
            self.n,
            rational_string(&self.theorem3),
            rational_string(&self.exact),
            self.mc.mean,
            self.mc.stderr,
            self.verdict
        )
    }
}
