//! Seeded parallel Monte Carlo harness with deterministic reduction.
//!
//! Per-sample RNGs are seeded as `seed_base + sample_index`, results are
//! collected by index and reduced serially, so any worker count produces
//! bit-identical output. Failed samples are skipped and reported; a run
//! fails once more than `FAILURE_BUDGET` of its samples abort.

use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;
use rayon::prelude::*;

use crate::{Result, SimError};

/// Fraction of samples allowed to abort before the whole run fails.
pub const FAILURE_BUDGET: f64 = 0.01;

/// Deterministic per-sample generator.
pub fn sample_rng(seed_base: u64, sample_index: u64) -> Pcg64Mcg {
    Pcg64Mcg::seed_from_u64(seed_base.wrapping_add(sample_index))
}

/// Run `n_samples` independent jobs, optionally inside a dedicated thread
/// pool of `workers` threads (0 or None = rayon default). `job` receives the
/// sample index and must do its own seeding via [`sample_rng`].
pub fn run_samples<T, F>(n_samples: usize, workers: Option<usize>, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if n_samples == 0 {
        return Err(SimError::Config("n_samples must be >= 1".into()));
    }
    let run = || -> Vec<Result<T>> {
        (0..n_samples).into_par_iter().map(&job).collect()
    };
    let results = match workers {
        Some(w) if w > 0 => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(w).build().map_err(|e| {
                SimError::Config(format!("failed to build worker pool: {e}"))
            })?;
            pool.install(run)
        }
        _ => run(),
    };

    let total = results.len();
    let mut ok = Vec::with_capacity(total);
    let mut failures: Vec<String> = Vec::new();
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => failures.push(e.to_string()),
        }
    }
    if !failures.is_empty() {
        let frac = failures.len() as f64 / total as f64;
        if frac > FAILURE_BUDGET {
            return Err(SimError::SampleBudget {
                failed: failures.len(),
                total,
                first: failures[0].clone(),
            });
        }
        eprintln!(
            "warning: {} of {} samples aborted (within budget): {}",
            failures.len(),
            total,
            failures[0]
        );
    }
    Ok(ok)
}

/// Mean and standard error of a set of per-sample observables
/// (`stderr = sample stddev / sqrt(n)`, zero for a single sample).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}
