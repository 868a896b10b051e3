//! Replication scheduling.
//!
//! Replications are independent, so the per-index work can run on a rayon
//! pool or sequentially. Both paths return results in index order; the
//! `parallel` cargo feature gates the rayon path, and without it every
//! request runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Environment variable that overrides the default worker count.
pub const THREADS_ENV: &str = "LOSSBOUND_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon workers, sized by `LOSSBOUND_THREADS` or the available parallelism.
    #[default]
    Parallel,
    /// Rayon pool with an explicit worker count.
    Threads(usize),
}

impl Execution {
    pub fn from_env() -> Self {
        match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            Some(0) | None => Execution::Parallel,
            Some(1) => Execution::Sequential,
            Some(k) => Execution::Threads(k),
        }
    }
}

/// Evaluates `f(0..count)` and returns the results in index order.
pub fn map_indexed<T, F>(count: u64, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..count).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => match Execution::from_env() {
            Execution::Threads(k) => run_in_pool(k, count, f),
            Execution::Sequential => (0..count).map(f).collect(),
            Execution::Parallel => (0..count).into_par_iter().map(f).collect(),
        },
        #[cfg(feature = "parallel")]
        Execution::Threads(k) => run_in_pool(k, count, f),
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel | Execution::Threads(_) => (0..count).map(f).collect(),
    }
}

#[cfg(feature = "parallel")]
fn run_in_pool<T, F>(threads: usize, count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| (0..count).into_par_iter().map(f).collect()),
        Err(_) => (0..count).map(f).collect(),
    }
}
