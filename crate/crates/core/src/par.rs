//! Batch mapping over corpus items, either on a rayon pool or sequentially.
//!
//! Results always come back in input order, so output is identical in
//! both modes. Without the `parallel` feature every mode runs sequentially.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// `threads == 0` uses rayon's global pool.
    Parallel { threads: usize },
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Parallel { threads: 0 }
        } else {
            Parallelism::Sequential
        }
    }
}

impl Parallelism {
    /// A pool bounded to `limit` workers; `1` is sequential.
    pub fn bounded(limit: usize) -> Self {
        if limit <= 1 {
            Parallelism::Sequential
        } else {
            Parallelism::Parallel { threads: limit }
        }
    }
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_indices<R, F>(n: usize, mode: Parallelism, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match mode {
        Parallelism::Sequential => (0..n).map(f).collect(),
        Parallelism::Parallel { threads } => parallel::map_indices(n, threads, f),
    }
}

/// Maps `f` over a slice, preserving order.
pub fn map<T, R, F>(items: &[T], mode: Parallelism, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_indices(items.len(), mode, |i| f(&items[i]))
}

#[cfg(feature = "parallel")]
mod parallel {
    use rayon::prelude::*;

    pub(super) fn map_indices<R, F>(n: usize, threads: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        let run = || (0..n).into_par_iter().map(&f).collect();
        if threads == 0 {
            return run();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                log::warn!("could not build a {threads}-thread pool ({e}); using the global pool");
                run()
            }
        }
    }
}

#[cfg(not(feature = "parallel"))]
mod parallel {
    pub(super) fn map_indices<R, F>(n: usize, _threads: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_preserve_order() {
        let items: Vec<u64> = (0..500).collect();
        let seq = map(&items, Parallelism::Sequential, |x| x * x);
        let par = map(&items, Parallelism::Parallel { threads: 4 }, |x| x * x);
        let global = map(&items, Parallelism::Parallel { threads: 0 }, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq, global);
        assert_eq!(seq[7], 49);
    }

    #[test]
    fn bounded_one_is_sequential() {
        assert_eq!(Parallelism::bounded(1), Parallelism::Sequential);
        assert_eq!(Parallelism::bounded(4), Parallelism::Parallel { threads: 4 });
    }
}
