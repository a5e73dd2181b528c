//! Replicate-level parallelism.
//!
//! Replicates are mapped over a rayon pool and collected in index order, so
//! reductions see the same sequence regardless of the worker count. The pool
//! size is capped by the `PDMP_THREADS` environment variable.

use rayon::prelude::*;

pub const THREADS_ENV: &str = "PDMP_THREADS";

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Evaluates `f(0..n)` in parallel and returns the results in index order.
pub fn map_replicates<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match thread_cap() {
        Some(1) => (0..n).map(f).collect(),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            Err(_) => (0..n).map(f).collect(),
        },
        None => (0..n).into_par_iter().map(f).collect(),
    }
}
