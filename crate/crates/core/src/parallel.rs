//! Indexed map over replications, on rayon when the `parallel` feature is on.
//!
//! Results always come back ordered by index, so reductions over them are
//! identical whatever the worker count.

/// How replications are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon's global pool.
    #[default]
    Parallel,
    /// A dedicated pool with this many workers.
    Threads(usize),
}

impl Execution {
    /// `None` or `Some(0)` selects the global pool.
    pub fn from_thread_cap(threads: Option<usize>) -> Self {
        match threads {
            None | Some(0) => Self::Parallel,
            Some(1) => Self::Sequential,
            Some(n) => Self::Threads(n),
        }
    }
}

pub fn map_indexed<T, F>(count: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    match exec {
        Execution::Sequential => map_sequential(count, f),
        Execution::Parallel => map_parallel(count, f),
        Execution::Threads(n) => with_pool(n, || map_parallel(count, f)),
    }
}

fn map_sequential<T, F: Fn(usize) -> T>(count: usize, f: F) -> Vec<T> {
    (0..count).map(f).collect()
}

#[cfg(feature = "parallel")]
fn map_parallel<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_parallel<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    map_sequential(count, f)
}

#[cfg(feature = "parallel")]
fn with_pool<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(op),
        Err(_) => op(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_pool<R: Send>(_threads: usize, op: impl FnOnce() -> R + Send) -> R {
    op()
}

/// Maps fallibly; on failure returns the error of the lowest failing index.
pub fn try_map_indexed<T, E, F>(count: usize, exec: Execution, f: F) -> Result<Vec<T>, (usize, E)>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Send + Sync,
{
    map_indexed(count, exec, f)
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| (i, e)))
        .collect()
}
