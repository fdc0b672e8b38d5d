//! Ordered map over a slice, parallel when the `parallel` feature is enabled.
//!
//! `jobs == 1` always runs sequentially on the calling thread; `jobs == 0`
//! lets rayon pick the thread count. Output order always matches input order.

/// Whether this build was compiled with rayon support.
pub const fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

pub fn map_ordered<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if jobs != 1 && items.len() > 1 {
            if let Some(out) = rayon_map(items, jobs, &f) {
                return out;
            }
        }
    }
    let _ = jobs;
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
fn rayon_map<T, R, F>(items: &[T], jobs: usize, f: &F) -> Option<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().ok()?;
    Some(pool.install(|| items.par_iter().map(f).collect()))
}
