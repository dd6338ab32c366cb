// Chunked loops that run on rayon with the `parallel` feature and on the
// calling thread without it. Every helper returns the sum of the per-chunk
// tallies so callers can count executed work items.

use crate::Key;

/// Keys handed to one parallel work chunk.
pub(crate) const GRAIN: usize = 1 << 14;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub(crate) fn chunks<F>(data: &mut [Key], size: usize, f: F) -> u64
where
    F: Fn(usize, &mut [Key]) -> u64 + Sync + Send,
{
    data.par_chunks_mut(size)
        .enumerate()
        .map(|(i, c)| f(i, c))
        .sum()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn chunks<F>(data: &mut [Key], size: usize, f: F) -> u64
where
    F: Fn(usize, &mut [Key]) -> u64 + Sync + Send,
{
    data.chunks_mut(size)
        .enumerate()
        .map(|(i, c)| f(i, c))
        .sum()
}

/// Like [`chunks`], with a scratch buffer of `size` keys per worker.
#[cfg(feature = "parallel")]
pub(crate) fn chunks_with_scratch<F>(data: &mut [Key], size: usize, f: F) -> u64
where
    F: Fn(usize, &mut [Key], &mut Vec<Key>) -> u64 + Sync + Send,
{
    data.par_chunks_mut(size)
        .with_min_len((GRAIN / size).max(1))
        .enumerate()
        .map_init(|| Vec::with_capacity(size), |buf, (i, c)| f(i, c, buf))
        .sum()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn chunks_with_scratch<F>(data: &mut [Key], size: usize, f: F) -> u64
where
    F: Fn(usize, &mut [Key], &mut Vec<Key>) -> u64 + Sync + Send,
{
    let mut buf = Vec::with_capacity(size);
    data.chunks_mut(size)
        .enumerate()
        .map(|(i, c)| f(i, c, &mut buf))
        .sum()
}

/// Walks two equally long slices in lockstep, `grain` keys at a time.
#[cfg(feature = "parallel")]
pub(crate) fn zip2<F>(a: &mut [Key], b: &mut [Key], grain: usize, f: F) -> u64
where
    F: Fn(&mut [Key], &mut [Key]) -> u64 + Sync + Send,
{
    a.par_chunks_mut(grain)
        .zip(b.par_chunks_mut(grain))
        .map(|(x, y)| f(x, y))
        .sum()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn zip2<F>(a: &mut [Key], b: &mut [Key], grain: usize, f: F) -> u64
where
    F: Fn(&mut [Key], &mut [Key]) -> u64 + Sync + Send,
{
    a.chunks_mut(grain)
        .zip(b.chunks_mut(grain))
        .map(|(x, y)| f(x, y))
        .sum()
}

#[cfg(feature = "parallel")]
pub(crate) fn zip4<F>(q: [&mut [Key]; 4], grain: usize, f: F) -> u64
where
    F: Fn(&mut [Key], &mut [Key], &mut [Key], &mut [Key]) -> u64 + Sync + Send,
{
    let [a, b, c, d] = q;
    (
        a.par_chunks_mut(grain),
        b.par_chunks_mut(grain),
        c.par_chunks_mut(grain),
        d.par_chunks_mut(grain),
    )
        .into_par_iter()
        .map(|(w, x, y, z)| f(w, x, y, z))
        .sum()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn zip4<F>(q: [&mut [Key]; 4], grain: usize, f: F) -> u64
where
    F: Fn(&mut [Key], &mut [Key], &mut [Key], &mut [Key]) -> u64 + Sync + Send,
{
    let [a, b, c, d] = q;
    a.chunks_mut(grain)
        .zip(b.chunks_mut(grain))
        .zip(c.chunks_mut(grain))
        .zip(d.chunks_mut(grain))
        .map(|(((w, x), y), z)| f(w, x, y, z))
        .sum()
}
