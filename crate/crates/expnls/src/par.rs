//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (the default) these map over rayon; without it
//! they run plain sequential loops. Both paths perform the same arithmetic in
//! the same per-element order, so results are bitwise identical regardless of
//! the feature or the worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n` and collect the results in index order.
#[cfg(feature = "parallel")]
pub fn collect_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n` and collect the results in index order.
#[cfg(not(feature = "parallel"))]
pub fn collect_indexed<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Apply `f` to every chunk of length `chunk` of `data`, passing the chunk index.
#[cfg(feature = "parallel")]
pub fn for_each_chunk_mut<T: Send, F: Fn(usize, &mut [T]) + Sync>(
    data: &mut [T],
    chunk: usize,
    f: F,
) {
    // batch neighbouring chunks into one task: per-chunk work is often tiny
    // (a single row transform), so fine-grained scheduling would dominate
    let n_chunks = data.len() / chunk.max(1);
    let per_task = n_chunks.div_ceil(4 * rayon::current_num_threads().max(1)).max(1);
    data.par_chunks_mut(chunk * per_task)
        .enumerate()
        .for_each(|(task, block)| {
            for (i, c) in block.chunks_mut(chunk).enumerate() {
                f(task * per_task + i, c);
            }
        });
}

/// Apply `f` to every chunk of length `chunk` of `data`, passing the chunk index.
#[cfg(not(feature = "parallel"))]
pub fn for_each_chunk_mut<T, F: Fn(usize, &mut [T])>(data: &mut [T], chunk: usize, f: F) {
    for (i, c) in data.chunks_mut(chunk).enumerate() {
        f(i, c);
    }
}

/// Label of the active execution mode, used by benches and diagnostics output.
pub fn mode() -> &'static str {
    if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential"
    }
}
