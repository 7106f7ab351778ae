//! Data-parallel helpers. With the `parallel` feature (default) work items are
//! spread over the rayon pool; without it they run sequentially in order.
//! Results are always returned in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to every item and collects the results in order.
pub fn map_items<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential reference path, always available for comparison.
pub fn map_items_sequential<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Runs `f` inside a pool of `jobs` threads (`0` = rayon default). Without the
/// `parallel` feature this just calls `f`.
pub fn with_jobs<U, F>(jobs: usize, f: F) -> U
where
    U: Send,
    F: FnOnce() -> U + Send,
{
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        f()
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
