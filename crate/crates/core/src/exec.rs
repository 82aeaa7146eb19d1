//! Row-block execution for the quadratic pair scans.
//!
//! With the `parallel` feature (on by default) rows are distributed over the
//! rayon pool; without it every strategy runs sequentially. Results are exact
//! integer sums, so they do not depend on the strategy or thread count.

/// How a pair scan walks its rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    /// Falls back to [`Strategy::Sequential`] when built without `parallel`.
    #[default]
    Parallel,
}

impl Strategy {
    /// True when this strategy will actually use the thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Strategy::Parallel
    }
}

/// Sums `row(i)` over `0..rows`.
pub(crate) fn sum_rows<F>(rows: usize, strategy: Strategy, row: F) -> u64
where
    F: Fn(usize) -> u64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if strategy.is_parallel() {
        use rayon::prelude::*;
        return (0..rows).into_par_iter().map(row).sum();
    }
    let _ = strategy;
    (0..rows).map(row).sum()
}

/// Componentwise sum of `row(i)` over `0..rows`.
pub(crate) fn sum_rows2<F>(rows: usize, strategy: Strategy, row: F) -> (u64, u64)
where
    F: Fn(usize) -> (u64, u64) + Sync + Send,
{
    let add = |a: (u64, u64), b: (u64, u64)| (a.0 + b.0, a.1 + b.1);
    #[cfg(feature = "parallel")]
    if strategy.is_parallel() {
        use rayon::prelude::*;
        return (0..rows).into_par_iter().map(row).reduce(|| (0, 0), add);
    }
    let _ = strategy;
    (0..rows).map(row).fold((0, 0), add)
}

/// Maps `row(i)` over `0..rows`, keeping row order.
pub(crate) fn map_rows<T, F>(rows: usize, strategy: Strategy, row: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if strategy.is_parallel() {
        use rayon::prelude::*;
        return (0..rows).into_par_iter().map(row).collect();
    }
    let _ = strategy;
    (0..rows).map(row).collect()
}
