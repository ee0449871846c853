//! Data-parallel helpers. With the `parallel` feature, independent work
//! items run on the rayon pool; without it (or when a caller opts out)
//! they run in order on the calling thread. Output order is the index
//! order either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// True when the crate was built with the `parallel` feature.
pub const fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}

/// Seed of the `k`-th independent random stream derived from `seed`.
/// Streams depend only on `(seed, k)`, so results do not depend on the
/// execution order.
pub fn stream_seed(seed: u64, k: usize) -> u64 {
    seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// `(0..n).map(f)` collected in index order, concurrently when requested
/// and available.
pub fn map_indexed<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}
