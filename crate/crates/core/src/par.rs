//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) the `Parallel` strategy runs on
//! the rayon global pool. Without it every strategy runs sequentially, so
//! callers never need their own `cfg` gates.

/// How a data-parallel loop should be executed.
#[derive(Copy, Clone, Debug, Default, Eq, PartialEq, Hash)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this strategy will actually fan out to worker threads.
    pub fn is_parallel(self) -> bool {
        matches!(self, Execution::Parallel) && cfg!(feature = "parallel")
    }
}

/// Map over a slice, preserving input order in the output.
pub fn map<T, U, F>(exec: Execution, data: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return data.par_iter().map(f).collect();
    }
    let _ = exec;
    data.iter().map(f).collect()
}

/// Flat-map over a slice, preserving input order in the output.
pub fn flat_map<T, U, F>(exec: Execution, data: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Vec<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return data.par_iter().flat_map_iter(f).collect();
    }
    let _ = exec;
    data.iter().flat_map(f).collect()
}
