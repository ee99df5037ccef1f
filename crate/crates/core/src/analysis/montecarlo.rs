//! Parallel trial execution with results reduced in trial-index order.

use rayon::prelude::*;

use crate::error::{Result, SimError};
use crate::rng::trial_seed;

/// Runs `f(index, seed)` for `n` trials on the current rayon pool. The output
/// is ordered by trial index, so any fold over it is independent of how many
/// workers ran.
pub fn run_trials<T, F>(n: u64, root_seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64) -> Result<T> + Sync,
{
    (0..n).into_par_iter().map(|i| f(i, trial_seed(root_seed, i))).collect()
}

/// Counts trials for which `f` returns true.
pub fn count_trials<F>(n: u64, root_seed: u64, f: F) -> Result<u64>
where
    F: Fn(u64, u64) -> Result<bool> + Sync,
{
    Ok(run_trials(n, root_seed, f)?.into_iter().filter(|&b| b).count() as u64)
}

/// Runs `job` inside a dedicated pool of `threads` workers (all cores if `None`).
pub fn with_threads<R: Send>(threads: Option<usize>, job: impl FnOnce() -> R + Send) -> Result<R> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(SimError::param("threads", "must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| SimError::InvalidInput(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_values_do_not_depend_on_threads() {
        let job = || run_trials(200, 9, |i, seed| Ok((i, seed.wrapping_mul(3)))).unwrap();
        let one = with_threads(Some(1), job).unwrap();
        let many = with_threads(Some(8), job).unwrap();
        assert_eq!(one, many);
        assert!(one.iter().enumerate().all(|(k, &(i, _))| k as u64 == i));
    }

    #[test]
    fn errors_propagate() {
        let r: Result<Vec<()>> = run_trials(10, 0, |i, _| {
            if i == 7 {
                Err(SimError::InsufficientData("boom".into()))
            } else {
                Ok(())
            }
        });
        assert!(r.is_err());
        assert!(with_threads(Some(0), || ()).is_err());
    }
}
