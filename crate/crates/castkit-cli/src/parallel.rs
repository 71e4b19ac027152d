//! Deterministic data-parallel frame processing. The map is pure and the
//! collect preserves frame order, so results are worker-count-invariant.

use rayon::prelude::*;

use crate::error::{contract, contract_bail, CliResult};

pub const THREADS_ENV: &str = "CASTKIT_THREADS";

/// Worker count, resolved as: `CASTKIT_THREADS` env override, then the
/// `--threads` flag, then available parallelism.
pub fn resolve_workers(flag: Option<usize>) -> CliResult<usize> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let workers: usize = value
            .parse()
            .map_err(|_| contract(anyhow::anyhow!("{THREADS_ENV}={value:?} is not a number")))?;
        if workers == 0 {
            contract_bail!("{THREADS_ENV} must be >= 1");
        }
        return Ok(workers);
    }
    if let Some(workers) = flag {
        if workers == 0 {
            contract_bail!("--threads must be >= 1");
        }
        return Ok(workers);
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Ordered parallel map over frames on a dedicated pool of `workers`
/// threads. The first error (by frame order) wins deterministically.
pub fn map_frames<T, R, F>(items: &[T], workers: usize, f: F) -> CliResult<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> CliResult<R> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::error::internal(anyhow::anyhow!("cannot build worker pool: {e}")))?;
    let results: Vec<CliResult<R>> = pool.install(|| {
        items
            .par_iter()
            .enumerate()
            .map(|(i, item)| f(i, item))
            .collect()
    });
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        out.push(r?);
    }
    Ok(out)
}
