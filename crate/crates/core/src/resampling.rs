//! Pooled-bootstrap null distribution of the mean-difference statistic.
//!
//! Under the null hypothesis both algorithms draw from the same
//! distribution, so the two samples are merged and every replicate draws
//! `n_a + n_b` values with replacement from the merged pool. The first
//! `n_a` draws play the role of sample A, the rest sample B, and the
//! replicate is `mean(A*) - mean(B*)`.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Replicates per random stream. Each batch owns a ChaCha stream, so the
/// output does not depend on how rayon splits the work.
const BATCH: usize = 1024;

/// Identity of one unordered comparison; the source of its random stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ComparisonSeed {
    master: u64,
    problem: String,
    pair: (String, String),
}

impl ComparisonSeed {
    /// The pair is stored sorted, so `(a, b)` and `(b, a)` share a seed.
    pub fn new(master: u64, problem: &str, a: &str, b: &str) -> Self {
        let pair = if a <= b { (a, b) } else { (b, a) };
        ComparisonSeed {
            master,
            problem: problem.to_owned(),
            pair: (pair.0.to_owned(), pair.1.to_owned()),
        }
    }

    pub fn derive(&self) -> u64 {
        derive_seed(
            self.master,
            "comparison",
            &[&self.problem, &self.pair.0, &self.pair.1],
        )
    }
}

/// Sorted bootstrap replicates `t*` of the mean difference `A - B`.
///
/// Cloning is cheap and [`negated`](Self::negated) is O(1): the reverse
/// direction `B - A` shares the same storage with a sign flag.
#[derive(Debug, Clone)]
pub struct BootstrapNull {
    sorted: Arc<[f64]>,
    negated: bool,
    size_a: usize,
    size_b: usize,
    seed_used: u64,
}

impl PartialEq for BootstrapNull {
    fn eq(&self, other: &Self) -> bool {
        self.size_a == other.size_a
            && self.size_b == other.size_b
            && self.seed_used == other.seed_used
            && self.iter().map(f64::to_bits).eq(other.iter().map(f64::to_bits))
    }
}

impl BootstrapNull {
    /// Wraps arbitrary replicates (sorted here). Sample sizes are recorded
    /// as zero; useful for tests and for re-reading a dumped null.
    pub fn from_replicates(mut replicates: Vec<f64>) -> Result<Self> {
        if replicates.is_empty() {
            return Err(Error::EmptySample);
        }
        if replicates.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("replicates must be finite".into()));
        }
        replicates.sort_unstable_by(f64::total_cmp);
        Ok(BootstrapNull {
            sorted: replicates.into(),
            negated: false,
            size_a: 0,
            size_b: 0,
            seed_used: 0,
        })
    }

    /// Number of replicates (`n_b`).
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Sample size on the candidate-side of the statistic (the minuend).
    pub fn size_a(&self) -> usize {
        if self.negated {
            self.size_b
        } else {
            self.size_a
        }
    }

    pub fn size_b(&self) -> usize {
        if self.negated {
            self.size_a
        } else {
            self.size_b
        }
    }

    pub fn seed_used(&self) -> u64 {
        self.seed_used
    }

    pub fn is_negated(&self) -> bool {
        self.negated
    }

    /// The null of the reversed statistic `B - A`.
    pub fn negated(&self) -> Self {
        BootstrapNull {
            negated: !self.negated,
            ..self.clone()
        }
    }

    /// `k`-th smallest replicate, 1-indexed.
    pub fn order_stat(&self, k: usize) -> f64 {
        assert!(k >= 1 && k <= self.len(), "order statistic {k} out of range");
        if self.negated {
            -self.sorted[self.len() - k]
        } else {
            self.sorted[k - 1]
        }
    }

    pub fn min(&self) -> f64 {
        self.order_stat(1)
    }

    pub fn max(&self) -> f64 {
        self.order_stat(self.len())
    }

    /// Replicates in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.len()).map(move |k| self.order_stat(k))
    }

    /// `#{t* <= x}`
    pub fn count_le(&self, x: f64) -> usize {
        if self.negated {
            // -t <= x  <=>  t >= -x
            self.len() - self.sorted.partition_point(|&t| t < -x)
        } else {
            self.sorted.partition_point(|&t| t <= x)
        }
    }

    /// `#{t* < x}`
    pub fn count_lt(&self, x: f64) -> usize {
        if self.negated {
            self.len() - self.sorted.partition_point(|&t| t <= -x)
        } else {
            self.sorted.partition_point(|&t| t < x)
        }
    }

    /// `#{t* >= x}`
    pub fn count_ge(&self, x: f64) -> usize {
        self.len() - self.count_lt(x)
    }

    /// `#{t* > x}`
    pub fn count_gt(&self, x: f64) -> usize {
        self.len() - self.count_le(x)
    }

    /// Upper-tail p-value `#{t* >= t_obs} / n_b`. No smoothing, so 0 is a
    /// possible result.
    pub fn p_value(&self, t_obs: f64) -> f64 {
        self.count_ge(t_obs) as f64 / self.len() as f64
    }

    /// Smallest replicate whose empirical CDF reaches `q`, i.e. the
    /// `ceil(q * n_b)`-th order statistic.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "quantile level must be in (0, 1], got {q}"
            )));
        }
        Ok(self.order_stat(min_count_reaching(q, self.len())))
    }

    /// Writes the replicates as a one-column CSV with header `t_star`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "t_star")?;
        for t in self.iter() {
            writeln!(out, "{t}")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Smallest `k` in `1..=n` with `k / n >= q`, evaluated with the same
/// floating-point division used for severities and p-values.
pub(crate) fn min_count_reaching(q: f64, n: usize) -> usize {
    let nf = n as f64;
    let mut k = ((q * nf).ceil() as usize).clamp(1, n);
    while k > 1 && (k - 1) as f64 / nf >= q {
        k -= 1;
    }
    while k < n && (k as f64 / nf) < q {
        k += 1;
    }
    k
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// `mean(a) - mean(b)`.
pub fn observed_stat(sample_a: &[f64], sample_b: &[f64]) -> Result<f64> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(mean(sample_a) - mean(sample_b))
}

/// Builds the pooled-bootstrap null of `mean(A) - mean(B)` with `resamples`
/// replicates.
///
/// Deterministic in `(samples, resamples, seed)`, independent of the rayon
/// thread count.
pub fn pooled_null(
    sample_a: &[f64],
    sample_b: &[f64],
    resamples: usize,
    seed: &ComparisonSeed,
) -> Result<BootstrapNull> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::EmptySample);
    }
    if resamples == 0 {
        return Err(Error::InvalidArgument("resample count must be >= 1".into()));
    }
    let seed_used = seed.derive();
    let size_a = sample_a.len();
    let size_b = sample_b.len();
    let pool: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();

    let mut replicates = vec![0.0f64; resamples];
    // A constant pool has the degenerate null {0}; skip the arithmetic, which
    // for unequal sizes could leave rounding noise instead of exact zeros.
    if pool.iter().any(|&v| v != pool[0]) {
        replicates
            .par_chunks_mut(BATCH)
            .enumerate()
            .for_each(|(batch, chunk)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed_used);
                rng.set_stream(batch as u64);
                for slot in chunk.iter_mut() {
                    *slot = draw_replicate(&mut rng, &pool, size_a);
                }
            });
        replicates.par_sort_unstable_by(f64::total_cmp);
    }

    Ok(BootstrapNull {
        sorted: replicates.into(),
        negated: false,
        size_a,
        size_b,
        seed_used,
    })
}

#[inline]
fn draw_replicate<R: Rng>(rng: &mut R, pool: &[f64], size_a: usize) -> f64 {
    let n = pool.len();
    let mut sum_a = 0.0;
    for _ in 0..size_a {
        sum_a += pool[rng.random_range(0..n)];
    }
    let mut sum_b = 0.0;
    for _ in size_a..n {
        sum_b += pool[rng.random_range(0..n)];
    }
    sum_a / size_a as f64 - sum_b / (n - size_a) as f64
}
