//! Seeded Monte Carlo oracle: uniform-sphere and Haar-orthogonal samplers and
//! estimators for the exact expectations computed elsewhere in the crate.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). Worker `w` of a
//! run with seed `s` uses the generator seeded by `s` on stream `w`, so a run
//! is fully determined by `(seed, samples, n, workers)`. Worker results are
//! merged by a pairwise reduction in worker-index order.

pub use nalgebra::DMatrix;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::combinat::{Pairing, SetPartition};
use crate::error::{argument_error, Result};
use crate::invariant_algebra::gram_inner;
use crate::linalg::to_f64;
use crate::moments::veronese_expectation;
use crate::tensor_numeric::{placed_tensor, DenseTensor, Vector};
use crate::weingarten::MomentQuery;
use crate::Limits;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
/// Agreement threshold, in standard errors.
pub const ACCEPTANCE_SIGMAS: f64 = 4.0;
/// Separation required before a Monte Carlo run is called decisive.
pub const ARBITRATION_SIGMAS: f64 = 6.0;

pub type McRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub samples: u64,
    pub n: usize,
    pub workers: usize,
}

impl SamplerConfig {
    pub fn new(n: usize, seed: u64, samples: u64) -> Result<Self> {
        if n == 0 {
            return Err(argument_error!("dimension n must be at least 1"));
        }
        if samples == 0 {
            return Err(argument_error!("sample count must be at least 1"));
        }
        Ok(Self {
            seed,
            samples,
            n,
            workers: 1,
        })
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    /// The generator used by worker `worker`.
    pub fn rng(&self, worker: usize) -> McRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(worker as u64);
        rng
    }
}

/// Sample mean with its standard error (sample standard deviation / √samples).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl Estimate {
    /// `|mean - exact| / stderr`; infinite when a zero-variance run misses.
    pub fn z_score(&self, exact: f64) -> f64 {
        let diff = (self.mean - exact).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.stderr
        }
    }

    pub fn agrees_with(&self, exact: f64, sigmas: f64) -> bool {
        self.z_score(exact) < sigmas
    }
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: RunningStats) -> RunningStats {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        RunningStats {
            count,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * w,
        }
    }

    fn estimate(&self) -> Estimate {
        let variance = if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        };
        Estimate {
            mean: self.mean,
            stderr: (variance.max(0.0) / self.count as f64).sqrt(),
            samples: self.count,
        }
    }
}

fn pairwise_merge(mut parts: Vec<Vec<RunningStats>>) -> Vec<RunningStats> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut iter = parts.into_iter();
        while let Some(left) = iter.next() {
            match iter.next() {
                Some(right) => next.push(
                    left.into_iter()
                        .zip(right)
                        .map(|(a, b)| a.merge(b))
                        .collect(),
                ),
                None => next.push(left),
            }
        }
        parts = next;
    }
    parts.pop().unwrap_or_default()
}

/// Runs `draw` `config.samples` times, `draw` filling one value per output
/// slot, and returns the per-slot estimates.
pub fn run_vector<F>(config: &SamplerConfig, len: usize, draw: F) -> Vec<Estimate>
where
    F: Fn(&mut McRng, &mut [f64]) + Sync,
{
    let workers = config.workers.max(1);
    let per_worker = |w: usize| {
        let base = config.samples / workers as u64;
        base + u64::from((w as u64) < config.samples % workers as u64)
    };
    let run_worker = |w: usize| {
        let mut rng = config.rng(w);
        let mut stats = vec![RunningStats::default(); len];
        let mut buf = vec![0.0; len];
        for _ in 0..per_worker(w) {
            draw(&mut rng, &mut buf);
            for (s, &x) in stats.iter_mut().zip(&buf) {
                s.push(x);
            }
        }
        stats
    };
    let parts: Vec<Vec<RunningStats>> = if workers == 1 {
        vec![run_worker(0)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| scope.spawn(move || run_worker(w)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("Monte Carlo worker panicked"))
                .collect()
        })
    };
    pairwise_merge(parts)
        .iter()
        .map(RunningStats::estimate)
        .collect()
}

/// Scalar version of [`run_vector`].
pub fn run_scalar<F>(config: &SamplerConfig, draw: F) -> Estimate
where
    F: Fn(&mut McRng) -> f64 + Sync,
{
    run_vector(config, 1, |rng, out| out[0] = draw(rng))[0]
}

/// Uniform point on the unit sphere of `R^n` (normalized Gaussian).
pub fn sample_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    loop {
        let coords: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-150 {
            return Vector::new(coords.into_iter().map(|c| c / norm).collect());
        }
    }
}

/// Haar-distributed element of `O(n)`: QR of a Gaussian matrix with the
/// columns of `Q` rescaled so that `R` has a positive diagonal.
pub fn sample_haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let gaussian = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let qr = gaussian.qr();
        let r = qr.r();
        if (0..n).any(|j| r[(j, j)].abs() < 1e-12) {
            continue;
        }
        let mut q = qr.q();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        return q;
    }
}

fn dot_moment(n: usize, power: usize, config: &SamplerConfig) -> Estimate {
    let power = power as i32;
    run_scalar(config, |rng| {
        let x = sample_sphere(n, rng);
        let y = sample_sphere(n, rng);
        x.dot(&y).powi(power)
    })
}

/// Estimates `E(⟨x, y⟩^{2k})` over independent uniform unit vectors.
pub fn estimate_dot_power(n: usize, k: usize, config: &SamplerConfig) -> Result<Estimate> {
    check_dimension(n, config)?;
    Ok(dot_moment(n, 2 * k, config))
}

fn check_dimension(n: usize, config: &SamplerConfig) -> Result<()> {
    if n != config.n {
        return Err(argument_error!(
            "dimension {n} does not match the sampler configuration (n = {})",
            config.n
        ));
    }
    Ok(())
}

/// Estimates `E(x_{i1 j1} ... x_{im jm})` over Haar-random orthogonal matrices.
pub fn estimate_query_moment(q: &MomentQuery, config: &SamplerConfig) -> Result<Estimate> {
    check_dimension(q.n(), config)?;
    let factors: Vec<(usize, usize)> = q.factors().iter().map(|&(i, j)| (i - 1, j - 1)).collect();
    Ok(run_scalar(config, |rng| {
        let x = sample_haar_orthogonal(q.n(), rng);
        factors.iter().map(|&(i, j)| x[(i, j)]).product()
    }))
}

/// Entrywise Monte Carlo estimate of a tensor expectation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorEstimate {
    pub n: usize,
    pub m: usize,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: u64,
}

impl TensorEstimate {
    /// Largest entrywise z-score against an exact tensor.
    pub fn max_z_score(&self, exact: &DenseTensor) -> Result<f64> {
        if exact.dim() != self.n || exact.order() != self.m {
            return Err(argument_error!("exact tensor has a different shape"));
        }
        Ok(self
            .mean
            .iter()
            .zip(&self.stderr)
            .zip(exact.entries())
            .map(|((&mean, &stderr), &x)| {
                Estimate {
                    mean,
                    stderr,
                    samples: self.samples,
                }
                .z_score(x)
            })
            .fold(0.0, f64::max))
    }
}

/// Entrywise running mean of the placed tensor `x_1(J_1) ⊗ ... ⊗ x_l(J_l)`
/// over independent uniform unit vectors.
pub fn estimate_tensor_expectation(
    partition: &SetPartition,
    config: &SamplerConfig,
    limits: &Limits,
) -> Result<TensorEstimate> {
    let (n, m) = (config.n, partition.order());
    let len = limits.dense_len(n, m)?;
    let estimates = run_vector(config, len, |rng, out| {
        let vectors: Vec<Vector> = (0..partition.len())
            .map(|_| sample_sphere(n, rng))
            .collect();
        let tensor = placed_tensor(&vectors, partition, limits).expect("shape checked above");
        out.copy_from_slice(tensor.entries());
    });
    Ok(TensorEstimate {
        n,
        m,
        mean: estimates.iter().map(|e| e.mean).collect(),
        stderr: estimates.iter().map(|e| e.stderr).collect(),
        samples: config.samples,
    })
}

/// Estimates `E(⟨x(P), y(Q)⟩)` where independent uniform unit vectors are
/// placed on the pairs of `P` and of `Q`.
pub fn estimate_pair_moment(p: &Pairing, q: &Pairing, config: &SamplerConfig) -> Result<Estimate> {
    if p.order() != q.order() {
        return Err(argument_error!(
            "pairings of order {} and {} cannot be compared",
            p.order(),
            q.order()
        ));
    }
    let n = config.n;
    let p_labels = p.to_partition().labels();
    let q_labels = q.to_partition().labels();
    Ok(run_scalar(config, |rng| {
        let xs: Vec<Vector> = (0..p.k()).map(|_| sample_sphere(n, rng)).collect();
        let ys: Vec<Vector> = (0..q.k()).map(|_| sample_sphere(n, rng)).collect();
        // Inner product of decomposable tensors is the product of slotwise inner products.
        p_labels
            .iter()
            .zip(&q_labels)
            .map(|(&a, &b)| xs[a].dot(&ys[b]))
            .product()
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma3Report {
    pub n: usize,
    pub m: usize,
    /// Monte Carlo estimate of `E(⟨x, y⟩^m)`.
    pub lhs: Estimate,
    /// Exact squared norm of the projected Veronese tensor.
    #[serde(serialize_with = "crate::moments::serialize_rational")]
    pub rhs: BigRational,
    pub agrees: bool,
}

/// Compares `E(⟨x, y⟩^m)` by sampling with the exact `‖E(x^{⊗m})‖²` computed
/// through the Gram form.
pub fn estimate_lemma3(
    n: usize,
    m: usize,
    config: &SamplerConfig,
    limits: &Limits,
) -> Result<Lemma3Report> {
    check_dimension(n, config)?;
    let expectation = veronese_expectation(m, n, limits)?;
    let rhs = gram_inner(&expectation, &expectation, n)?;
    let lhs = dot_moment(n, m, config);
    Ok(Lemma3Report {
        n,
        m,
        agrees: lhs.agrees_with(to_f64(&rhs), ACCEPTANCE_SIGMAS),
        lhs,
        rhs,
    })
}
