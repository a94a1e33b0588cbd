//! Deterministic parallel reduction over sample indices.
//!
//! Samples are cut into fixed-size chunks; each chunk is reduced
//! sequentially and chunk results are merged in chunk order, so the result is
//! bitwise independent of the number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const CHUNK: u64 = 2048;
const BATCH: u64 = 4096;

/// Reduces `body(acc, sample_index)` over `start..start + count`.
pub fn chunked_reduce<A, I, B, M>(start: u64, count: u64, init: I, body: B, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    B: Fn(&mut A, u64) + Sync,
    M: Fn(&mut A, A),
{
    let nchunks = count.div_ceil(CHUNK);
    let mut total = init();
    // Chunk results are held one batch at a time so memory stays bounded
    // for very large sample counts; merge order is unchanged.
    let mut first = 0;
    while first < nchunks {
        let last = (first + BATCH).min(nchunks);
        let parts: Vec<A> = (first..last)
            .into_par_iter()
            .map(|c| {
                let lo = start + c * CHUNK;
                let hi = (lo + CHUNK).min(start + count);
                let mut acc = init();
                for k in lo..hi {
                    body(&mut acc, k);
                }
                acc
            })
            .collect();
        for p in parts {
            merge(&mut total, p);
        }
        first = last;
    }
    total
}

/// Runs `f` on a pool with `threads` workers (`0` = rayon's default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
