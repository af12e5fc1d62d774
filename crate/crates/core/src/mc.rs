//! Deterministic Monte Carlo batches: path `i` always uses stream `i` of the
//! batch seed, and results are collected in index order, so output does not
//! depend on the number of worker threads.

use rayon::prelude::*;

use crate::error::Result;
use crate::fbm::FbmSampler;
use crate::path::SamplePath;

/// Maps `f` over driver paths `start..start + count` in parallel, preserving order.
pub fn map_paths<T, F>(sampler: &FbmSampler, start: u64, count: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, SamplePath) -> Result<T> + Sync,
{
    (start..start + count)
        .into_par_iter()
        .map(|i| f(i, sampler.sample_path(i)))
        .collect()
}

/// Sample mean and standard error, summed in order.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
