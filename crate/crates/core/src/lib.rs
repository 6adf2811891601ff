//! Exact and Monte Carlo evaluation of expectations over the orthogonal group
//! `O(n)` and the unit sphere `S^{n-1}`.
//!
//! Invariant tensors of `O(n)` are spanned by products of Kronecker deltas
//! indexed by pairings of `{1, ..., 2k}`. This crate enumerates those
//! pairings, builds their Gram matrices as polynomials in `n`, evaluates
//! sphere and Haar moments in closed form or by solving the normal
//! equations exactly, and cross-checks everything against seeded Monte Carlo
//! estimates.

pub mod combinat;
pub mod error;
pub mod invariant_algebra;
pub mod limits;
pub mod linalg;
pub mod moments;
pub mod montecarlo;
pub mod tensor_numeric;
pub mod weingarten;

pub use combinat::{enumerate_pairings, pairing_count, IndexPermutation, Pairing, SetPartition};
pub use error::{Error, Result};
pub use invariant_algebra::{gram_matrix, GramMatrix, InvariantCombination, NPolynomial};
pub use limits::Limits;
pub use linalg::PivotOrder;
pub use moments::{mu, p_poly, Rational};
pub use montecarlo::{Estimate, SamplerConfig};
pub use tensor_numeric::{DenseTensor, Vector};
pub use weingarten::{exact_moment, theorem3_moment, MethodComparison, MomentQuery};
