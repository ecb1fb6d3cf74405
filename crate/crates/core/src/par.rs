//! Data-parallel helpers. With the `parallel` feature off every helper runs
//! sequentially with the same results.

/// Below this many items the helpers stay on the calling thread.
const MIN_PARALLEL: usize = 1024;

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Maps every item, preserving order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Keeps the items satisfying `keep`, preserving order. Splits large inputs across threads.
pub fn filter<T, F>(items: &[T], keep: F) -> Vec<T>
where
    T: Sync + Send + Clone,
    F: Fn(&T) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if items.len() >= MIN_PARALLEL {
            return items.par_iter().filter(|t| keep(t)).cloned().collect();
        }
    }
    let _ = MIN_PARALLEL;
    items.iter().filter(|t| keep(t)).cloned().collect()
}

/// Keeps the indexes `i` in `0..n` with `keep(i)`, in increasing order.
pub fn filter_indexes<F>(n: usize, keep: F) -> Vec<usize>
where
    F: Fn(usize) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if n >= MIN_PARALLEL {
            return (0..n).into_par_iter().filter(|&i| keep(i)).collect();
        }
    }
    (0..n).filter(|&i| keep(i)).collect()
}
