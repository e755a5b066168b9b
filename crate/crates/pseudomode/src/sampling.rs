//! Parallel driver for the core jump sampler.

use pseudomode_core::jumps::{JumpSampleSet, JumpSampler};
use rayon::prelude::*;

/// Draws runs `0..n` on `workers` threads (rayon's default when `None`).
///
/// Run `i` depends only on `(master_seed, i)` and results are gathered in
/// run order, so the sample set is bitwise identical for every worker count.
pub fn sample_parallel(
    sampler: &JumpSampler,
    n: u64,
    workers: Option<usize>,
) -> Result<JumpSampleSet, rayon::ThreadPoolBuildError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build()?;
    let draws: Vec<Option<f64>> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|run| sampler.draw(run))
            .collect()
    });
    Ok(sampler.collect(draws))
}
