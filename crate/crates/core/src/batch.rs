//! Per-point batch evaluation. With the `parallel` feature points are spread
//! over a rayon pool; otherwise they run in order on the calling thread.
//! Results always come back in input order.

/// Map `f` over `items`. `threads = None` uses the global pool (or all
/// cores); `Some(n)` uses a dedicated pool of `n` workers.
#[cfg(feature = "parallel")]
pub fn map_points<T, R, F>(items: &[T], threads: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    let run = || items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect();
    match threads {
        Some(1) => map_points_sequential(items, f),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(_) => map_points_sequential(items, f),
        },
        None => run(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_points<T, R, F>(items: &[T], _threads: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    map_points_sequential(items, f)
}

pub fn map_points_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(usize, &T) -> R,
{
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}
