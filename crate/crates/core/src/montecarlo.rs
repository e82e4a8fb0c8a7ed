//! Chunked Monte Carlo driver.
//!
//! Samples are split into fixed-size chunks. Chunk `c` draws from its own
//! stream `(base, c)` where `base` is taken from the caller's generator, so
//! the result depends only on the caller's generator state and the sample
//! count. Workers only change scheduling: partial results are merged in chunk
//! order, which keeps every estimate bit-identical for any worker count.

use num_complex::Complex64;
use rand::RngCore;
use rayon::prelude::*;

use crate::matcore::ComplexMatrix;
use crate::randmat::RngHandle;
use crate::{Error, Result};

/// Samples per chunk.
pub const CHUNK_SIZE: usize = 1024;

/// Environment variable consulted for the default worker count.
pub const WORKERS_ENV: &str = "DISCORD_WITNESS_WORKERS";

/// Sample count and parallelism for one estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonteCarlo {
    pub n_samples: usize,
    pub workers: usize,
}

impl MonteCarlo {
    pub fn new(n_samples: usize) -> Self {
        Self {
            n_samples,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    fn check(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::TooFewSamples(self.n_samples));
        }
        Ok(())
    }
}

/// Mean of a scalar Monte Carlo average and its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// `sample_std / sqrt(n_samples)`.
    pub std_error: f64,
    pub n_samples: usize,
}

impl McEstimate {
    /// Root mean square `sqrt(mean)` for an estimate of a squared quantity.
    pub fn rms(&self) -> f64 {
        self.mean.max(0.0).sqrt()
    }

    /// Standard error of [`McEstimate::rms`], `std_error / (2 rms)`.
    pub fn rms_std_error(&self) -> f64 {
        let rms = self.rms();
        if rms > 0.0 {
            self.std_error / (2.0 * rms)
        } else {
            0.0
        }
    }

    /// `(mean - target) / std_error`; zero when both the deviation and the
    /// error vanish.
    pub fn z_score(&self, target: f64) -> f64 {
        let dev = self.mean - target;
        if self.std_error > 0.0 {
            dev / self.std_error
        } else if dev == 0.0 {
            0.0
        } else {
            dev.signum() * f64::INFINITY
        }
    }

    /// An exact value with no sampling error.
    pub fn exact(value: f64, n_samples: usize) -> Self {
        Self {
            mean: value,
            std_error: 0.0,
            n_samples,
        }
    }
}

/// Partial result that can absorb another partial result.
pub trait Accumulator: Send {
    fn merge(&mut self, other: Self);
}

/// Welford running mean and second moment.
#[derive(Clone, Copy, Debug, Default)]
pub struct ScalarStats {
    n: usize,
    mean: f64,
    m2: f64,
}

impl ScalarStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sample_variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn estimate(&self) -> McEstimate {
        McEstimate {
            mean: self.mean,
            std_error: (self.sample_variance() / self.n as f64).sqrt(),
            n_samples: self.n,
        }
    }
}

impl Accumulator for ScalarStats {
    fn merge(&mut self, other: Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }
}

/// Elementwise Welford statistics of a matrix-valued sample.
#[derive(Clone, Debug)]
pub struct MatrixStats {
    dim: usize,
    re: Vec<ScalarStats>,
    im: Vec<ScalarStats>,
}

impl MatrixStats {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            re: vec![ScalarStats::default(); dim * dim],
            im: vec![ScalarStats::default(); dim * dim],
        }
    }

    pub fn push(&mut self, x: &ComplexMatrix) {
        debug_assert_eq!(x.dim(), self.dim);
        for ((z, r), i) in x.as_slice().iter().zip(&mut self.re).zip(&mut self.im) {
            r.push(z.re);
            i.push(z.im);
        }
    }

    pub fn count(&self) -> usize {
        self.re.first().map_or(0, ScalarStats::count)
    }

    pub fn estimate(&self) -> MatrixEstimate {
        let mean = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| Complex64::new(r.mean(), i.mean()))
            .collect();
        MatrixEstimate {
            mean: ComplexMatrix::from_row_major(self.dim, mean).expect("dim >= 1"),
            std_error_re: self.re.iter().map(|s| s.estimate().std_error).collect(),
            std_error_im: self.im.iter().map(|s| s.estimate().std_error).collect(),
            n_samples: self.count(),
        }
    }
}

impl Accumulator for MatrixStats {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.re.iter_mut().zip(other.re) {
            a.merge(b);
        }
        for (a, b) in self.im.iter_mut().zip(other.im) {
            a.merge(b);
        }
    }
}

/// Elementwise mean of a matrix-valued estimate with row-major standard errors.
#[derive(Clone, Debug)]
pub struct MatrixEstimate {
    pub mean: ComplexMatrix,
    pub std_error_re: Vec<f64>,
    pub std_error_im: Vec<f64>,
    pub n_samples: usize,
}

impl MatrixEstimate {
    /// `sqrt(Σ σ²)` over all real and imaginary parts: the expected
    /// Hilbert-Schmidt size of the sampling error.
    pub fn aggregate_error(&self) -> f64 {
        self.std_error_re
            .iter()
            .chain(&self.std_error_im)
            .map(|s| s * s)
            .sum::<f64>()
            .sqrt()
    }

    /// Largest `|mean - target| / σ` over all real and imaginary parts.
    /// Parts with zero error count only if they deviate by more than `floor`.
    pub fn max_z_score(&self, target: &ComplexMatrix, floor: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, (m, t)) in self
            .mean
            .as_slice()
            .iter()
            .zip(target.as_slice())
            .enumerate()
        {
            for (dev, se) in [
                ((m.re - t.re).abs(), self.std_error_re[k]),
                ((m.im - t.im).abs(), self.std_error_im[k]),
            ] {
                let z = if se > 0.0 {
                    dev / se
                } else if dev <= floor {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst = worst.max(z);
            }
        }
        worst
    }
}

/// Runs `step` once per sample and merges the per-chunk accumulators in
/// chunk order.
pub fn run_chunked<A, I, S>(mc: &MonteCarlo, rng: &mut RngHandle, init: I, step: S) -> Result<A>
where
    A: Accumulator,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, &mut RngHandle) -> Result<()> + Sync,
{
    mc.check()?;
    let base = rng.next_u64();
    let n_chunks = mc.n_samples.div_ceil(CHUNK_SIZE);
    let run_chunk = |c: usize| -> Result<A> {
        let mut chunk_rng = RngHandle::with_stream(base, c as u64);
        let mut acc = init();
        let len = CHUNK_SIZE.min(mc.n_samples - c * CHUNK_SIZE);
        for _ in 0..len {
            step(&mut acc, &mut chunk_rng)?;
        }
        Ok(acc)
    };

    let partials: Vec<Result<A>> = if mc.workers <= 1 || n_chunks <= 1 {
        (0..n_chunks).map(run_chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(mc.workers)
            .build()
            .expect("failed to build worker pool");
        pool.install(|| (0..n_chunks).into_par_iter().map(run_chunk).collect())
    };

    let mut iter = partials.into_iter();
    let mut total = iter.next().expect("at least one chunk")?;
    for part in iter {
        total.merge(part?);
    }
    Ok(total)
}

/// Scalar Monte Carlo mean of `sample`.
pub fn estimate_mean<S>(mc: &MonteCarlo, rng: &mut RngHandle, sample: S) -> Result<McEstimate>
where
    S: Fn(&mut RngHandle) -> Result<f64> + Sync,
{
    let stats = run_chunked(mc, rng, ScalarStats::default, |acc, r| {
        acc.push(sample(r)?);
        Ok(())
    })?;
    Ok(stats.estimate())
}

/// Elementwise Monte Carlo mean of a matrix-valued `sample`.
pub fn estimate_matrix_mean<S>(
    mc: &MonteCarlo,
    dim: usize,
    rng: &mut RngHandle,
    sample: S,
) -> Result<MatrixEstimate>
where
    S: Fn(&mut RngHandle) -> Result<ComplexMatrix> + Sync,
{
    let stats = run_chunked(
        mc,
        rng,
        || MatrixStats::new(dim),
        |acc, r| {
            acc.push(&sample(r)?);
            Ok(())
        },
    )?;
    Ok(stats.estimate())
}

/// Default worker count: `DISCORD_WITNESS_WORKERS` if set and valid, else 1.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w >= 1)
        .unwrap_or(1)
}
