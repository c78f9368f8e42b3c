//! Execution helpers: data-parallel loops with a sequential fallback.
//!
//! With the `parallel` feature (default) the indexed helpers run on the rayon
//! thread pool; without it they degrade to plain iterators. The `*_seq`
//! variants are always sequential and exist so benchmarks can compare both
//! code paths in a single build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sequential twin of [`map_indexed`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Runs `f` over equal-sized disjoint chunks of `data`, passing the chunk index.
/// `data.len()` must be a multiple of `chunk`.
#[cfg(feature = "parallel")]
pub fn for_each_chunk<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    debug_assert_eq!(data.len() % chunk.max(1), 0);
    data.par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

/// Runs `f` over equal-sized disjoint chunks of `data`, passing the chunk index.
#[cfg(not(feature = "parallel"))]
pub fn for_each_chunk<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    for_each_chunk_seq(data, chunk, f)
}

/// Sequential twin of [`for_each_chunk`].
pub fn for_each_chunk_seq<T, F>(data: &mut [T], chunk: usize, f: F)
where
    F: Fn(usize, &mut [T]),
{
    debug_assert_eq!(data.len() % chunk.max(1), 0);
    for (i, c) in data.chunks_mut(chunk).enumerate() {
        f(i, c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_indexed_preserves_order() {
        let v = map_indexed(100, |i| i * i);
        let s = map_indexed_seq(100, |i| i * i);
        assert_eq!(v, s);
    }

    #[test]
    fn chunked_writes_cover_all() {
        let mut a = vec![0usize; 24];
        let mut b = vec![0usize; 24];
        for_each_chunk(&mut a, 4, |i, c| c.iter_mut().for_each(|x| *x = i));
        for_each_chunk_seq(&mut b, 4, |i, c| c.iter_mut().for_each(|x| *x = i));
        assert_eq!(a, b);
    }
}

/// Applies the `T3CEN_THREADS` cap to the global thread pool. A no-op when
/// the variable is unset, unparsable, or the pool was already built.
#[cfg(feature = "parallel")]
pub fn apply_thread_cap_from_env() {
    if let Ok(v) = std::env::var("T3CEN_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

/// Sequential build: the cap has nothing to configure.
#[cfg(not(feature = "parallel"))]
pub fn apply_thread_cap_from_env() {}
