//! Thresholds and small helpers for the optional rayon paths.
//!
//! With `--no-default-features` everything in the crate runs sequentially;
//! the public `*_seq` functions remain available in both configurations so
//! the benches can compare the two paths inside one build.

/// Term-pair count above which a polynomial product moves to rayon.
pub const POLY_MUL_PAR_THRESHOLD: usize = 2048;

/// Map a slice, in parallel when the feature is on and the input is large.
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if items.len() > 1 {
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// Sequential twin of [`map_collect`], kept for benchmarking.
pub fn map_collect_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}
