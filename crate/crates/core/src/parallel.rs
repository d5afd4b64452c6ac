//! Data-parallel helpers with sequential fallbacks.
//!
//! With the `parallel` feature (default) the heavy sweeps — Hausdorff
//! distances, angular grids, probe batches — run on rayon. Without it the
//! same entry points run sequentially, which is useful for profiling and
//! for the criterion benches that compare both paths.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items` and take the max (−∞ for empty input).
pub fn map_reduce_max<T: Sync, F>(items: &[T], f: F) -> f64
where
    F: Fn(&T) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if items.len() >= 512 {
            return items
                .par_iter()
                .map(&f)
                .reduce(|| f64::NEG_INFINITY, f64::max);
        }
    }
    map_reduce_max_seq(items, f)
}

/// Sequential twin of [`map_reduce_max`], kept callable for benchmarks.
pub fn map_reduce_max_seq<T, F>(items: &[T], f: F) -> f64
where
    F: Fn(&T) -> f64,
{
    items.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
}

/// Evaluate `f` on 0..n and collect.
pub fn map_collect<T: Send, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= 512 {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    map_collect_seq(n, f)
}

/// Sequential twin of [`map_collect`].
pub fn map_collect_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Minimum of `f` over 0..n (∞ for n = 0).
pub fn min_over<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= 512 {
            return (0..n)
                .into_par_iter()
                .map(f)
                .reduce(|| f64::INFINITY, f64::min);
        }
    }
    min_over_seq(n, f)
}

/// Sequential twin of [`min_over`].
pub fn min_over_seq<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64,
{
    (0..n).map(f).fold(f64::INFINITY, f64::min)
}
