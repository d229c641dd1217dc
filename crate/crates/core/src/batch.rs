//! Deterministic batched sampling.
//!
//! Trials are cut into fixed-size batches. Batch `b` draws from the ChaCha8
//! stream `b` of the user seed, so the per-batch tallies do not depend on
//! which thread runs which batch. Tallies are merged in batch order, which
//! makes sequential and parallel runs bit-identical, floating-point sums
//! included.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub const BATCH_SIZE: u64 = 16_384;

/// How batches are scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

/// Per-batch accumulator.
pub trait Tally: Default + Send {
    fn merge(&mut self, other: Self);
}

/// RNG for batch `batch` of a run seeded with `seed`.
pub fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Runs `trials` trials of `body` and merges the per-batch tallies.
///
/// `body(rng, n)` must run exactly `n` trials using only `rng`.
pub fn run_batched<T, F>(trials: u64, seed: u64, execution: Execution, body: F) -> T
where
    T: Tally,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let batches = trials.div_ceil(BATCH_SIZE);
    let run_one = |b: u64| {
        let n = BATCH_SIZE.min(trials - b * BATCH_SIZE);
        body(&mut batch_rng(seed, b), n)
    };
    let parts: Vec<T> = match execution {
        Execution::Sequential => (0..batches).map(run_one).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..batches).into_par_iter().map(run_one).collect(),
    };
    parts.into_iter().fold(T::default(), |mut acc, t| {
        acc.merge(t);
        acc
    })
}
