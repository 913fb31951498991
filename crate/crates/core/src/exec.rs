//! Sequential or rayon-backed execution of node-indexed work.
//!
//! Every parallel path computes each output slot independently and in a
//! fixed summation order, so results are bitwise identical between the two
//! strategies and across thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many output slots `Strategy::Auto` stays sequential.
pub const PARALLEL_THRESHOLD: usize = 512;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    /// Parallel for large inputs when the `parallel` feature is on.
    #[default]
    Auto,
    /// Parallel whenever the `parallel` feature is on; sequential otherwise.
    Parallel,
}

impl Strategy {
    pub fn is_parallel_for(self, len: usize) -> bool {
        if !cfg!(feature = "parallel") {
            return false;
        }
        match self {
            Strategy::Sequential => false,
            Strategy::Auto => len >= PARALLEL_THRESHOLD,
            Strategy::Parallel => true,
        }
    }
}

/// Evaluates `f(0..len)` into a vector, in index order.
pub fn map_indices<T, F>(len: usize, strategy: Strategy, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if strategy.is_parallel_for(len) {
        return (0..len).into_par_iter().with_min_len(32).map(f).collect();
    }
    let _ = strategy;
    (0..len).map(f).collect()
}

/// Maps a slice of independent jobs, preserving order.
pub fn map_items<I, T, F>(items: &[I], strategy: Strategy, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_indices(items.len(), strategy, |i| f(&items[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let a = map_indices(2000, Strategy::Sequential, f);
        let b = map_indices(2000, Strategy::Parallel, f);
        assert_eq!(a, b);
    }

    #[test]
    fn sequential_is_never_parallel() {
        assert!(!Strategy::Sequential.is_parallel_for(1 << 20));
        assert!(!Strategy::Auto.is_parallel_for(4));
    }
}
