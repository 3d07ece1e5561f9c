//! Data-parallel helpers. With the `parallel` feature the closures run on the rayon pool,
//! otherwise sequentially. Reductions always combine partial results in index order, so
//! results do not depend on the number of threads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Calls `f(row, chunk)` for every `row_len`-sized chunk of `data`.
pub fn for_each_row<T, F>(data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if row_len == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(row_len).enumerate().for_each(|(r, c)| f(r, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(row_len).enumerate().for_each(|(r, c)| f(r, c));
    }
}

/// Fixed-order sum of `f(i)` over `0..n`.
pub fn sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_collect(n, f).into_iter().sum()
}

/// Maximum of `f(i)` over `0..n` (0 for empty ranges).
pub fn max<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_collect(n, f).into_iter().fold(0.0, f64::max)
}

/// Fixed-order dot product, accumulated in blocks.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    const BLOCK: usize = 4096;
    let blocks = a.len().div_ceil(BLOCK);
    sum(blocks, |k| {
        let lo = k * BLOCK;
        let hi = (lo + BLOCK).min(a.len());
        a[lo..hi].iter().zip(&b[lo..hi]).map(|(x, y)| x * y).sum()
    })
}

/// Number of worker threads the helpers use.
pub fn threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
