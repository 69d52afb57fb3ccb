//! Thin switch between rayon and plain iterators.
//!
//! Every helper produces the same result, bit for bit, in both builds: work is
//! split into fixed chunks and reductions break ties on the lowest index.

use std::ops::Range;

/// Chunk length for blocked loops. Fixed so results do not depend on the
/// thread count.
pub const CHUNK: usize = 4096;

/// Maps `f` over `0..n` and collects in index order.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Fallible version of [`map_collect`]. The error reported is the one with the
/// lowest index.
pub fn try_map_collect<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    let results = map_collect(n, f);
    results.into_iter().collect()
}

/// Best `(score, index)` pair over `0..n` in blocks, lowest score first, ties
/// to the lowest index. `block` returns the best candidate inside its range.
pub fn argmin_blocks<F>(n: usize, block: F) -> Option<(f64, usize)>
where
    F: Fn(Range<usize>) -> Option<(f64, usize)> + Sync + Send,
{
    let n_blocks = n.div_ceil(CHUNK);
    let pick = |a: Option<(f64, usize)>, b: Option<(f64, usize)>| match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                Some(b)
            } else {
                Some(a)
            }
        }
    };
    let run = |b: usize| block(b * CHUNK..((b + 1) * CHUNK).min(n));
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n_blocks).into_par_iter().map(run).reduce(|| None, pick)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n_blocks).map(run).fold(None, pick)
    }
}
