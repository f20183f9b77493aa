//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers dispatch to rayon when asked for
//! [`Execution::Parallel`]; without it every call runs on the current thread.
//! Results are always collected in index order, so outputs do not depend on
//! the thread count.

use serde::{Deserialize, Serialize};

/// How a batch of independent work items is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    #[default]
    Sequential,
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..n).map(f).collect()`, in parallel when requested and available.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Maps over a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], exec: Execution, f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indexed(items.len(), exec, |i| f(&items[i]))
}

/// Sum of `f(i)` over fixed-size chunks; chunk partial sums are added in
/// index order so the result is reproducible.
pub fn chunked_sum<F>(n: usize, chunk: usize, exec: Execution, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunk = chunk.max(1);
    let n_chunks = n.div_ceil(chunk);
    map_indexed(n_chunks, exec, |c| {
        let lo = c * chunk;
        let hi = (lo + chunk).min(n);
        (lo..hi).map(&f).sum::<f64>()
    })
    .into_iter()
    .sum()
}

/// Runs `f` inside a dedicated pool of `threads` workers when the feature is
/// enabled; otherwise just calls it.
pub fn with_threads<R: Send, F: FnOnce() -> R + Send>(threads: usize, f: F) -> R {
    #[cfg(feature = "parallel")]
    if threads > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            return pool.install(f);
        }
    }
    let _ = threads;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let a = map_indexed(1000, Execution::Sequential, |i| (i as f64).sqrt());
        let b = map_indexed(1000, Execution::Parallel, |i| (i as f64).sqrt());
        assert_eq!(a, b);
        let s1 = chunked_sum(10_001, 64, Execution::Sequential, |i| 1.0 / (1.0 + i as f64));
        let s2 = chunked_sum(10_001, 64, Execution::Parallel, |i| 1.0 / (1.0 + i as f64));
        assert_eq!(s1.to_bits(), s2.to_bits());
    }
}
