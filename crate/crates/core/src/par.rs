//! Thread configuration and reductions.
//!
//! In deterministic mode every sum is split into fixed-size chunks whose
//! boundaries do not depend on the number of worker threads; each chunk and
//! the list of chunk sums are combined by a pairwise tree. The result is
//! therefore bit-identical for any thread count.

use rayon::prelude::*;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Once;

const CHUNK: usize = 1024;
const LEAF: usize = 32;

static DETERMINISTIC: AtomicBool = AtomicBool::new(false);
static INIT: Once = Once::new();

/// Reads `CYLVAR_DETERMINISTIC` and `CYLVAR_THREADS` once and configures the
/// global rayon pool. Later calls are no-ops.
pub fn init_from_env() {
    INIT.call_once(|| {
        if std::env::var("CYLVAR_DETERMINISTIC").map(|v| v == "1").unwrap_or(false) {
            DETERMINISTIC.store(true, Ordering::SeqCst);
        }
        if let Some(n) = std::env::var("CYLVAR_THREADS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
        {
            // Fails only if a pool already exists, in which case we keep it.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    });
}

pub fn set_deterministic(on: bool) {
    DETERMINISTIC.store(on, Ordering::SeqCst);
}

pub fn deterministic() -> bool {
    DETERMINISTIC.load(Ordering::Relaxed)
}

/// Pairwise sum of a slice.
pub fn pairwise(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise(&xs[..mid]) + pairwise(&xs[mid..])
    }
}

/// Sum of `f(i)` for `i in 0..n`.
pub fn sum_map<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    if deterministic() {
        let nchunks = n.div_ceil(CHUNK);
        let partial: Vec<f64> = (0..nchunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(n);
                let mut buf = [0.0f64; CHUNK];
                for (slot, i) in buf.iter_mut().zip(lo..hi) {
                    *slot = f(i);
                }
                pairwise(&buf[..hi - lo])
            })
            .collect();
        pairwise(&partial)
    } else {
        (0..n).into_par_iter().map(f).sum()
    }
}

pub fn sum(xs: &[f64]) -> f64 {
    sum_map(xs.len(), |i| xs[i])
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum_map(a.len(), |i| a[i] * b[i])
}

/// Maximum of `f(i)`; order independent, so no special deterministic path.
pub fn max_map<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    (0..n).into_par_iter().map(f).reduce(|| 0.0f64, f64::max)
}
