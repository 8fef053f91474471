//! Data-parallel helpers: a rayon pool capped by `DDR_LIFT_THREADS`, or plain
//! sequential iteration when the `parallel` feature is off.

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "DDR_LIFT_THREADS";

/// Worker count requested through the environment, if any.
pub fn requested_threads() -> Option<usize> {
    std::env::var(THREADS_VAR).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0)
}

#[cfg(feature = "parallel")]
mod imp {
    use std::sync::OnceLock;

    use rayon::prelude::*;

    fn pool() -> &'static rayon::ThreadPool {
        static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
        POOL.get_or_init(|| {
            let mut b = rayon::ThreadPoolBuilder::new().thread_name(|i| format!("ddr-worker-{i}"));
            if let Some(n) = super::requested_threads() {
                b = b.num_threads(n);
            }
            b.build().expect("failed to build the worker pool")
        })
    }

    pub fn threads() -> usize {
        pool().current_num_threads()
    }

    pub fn map<T: Send>(n: usize, sequential: bool, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        if sequential || n < 2 {
            return (0..n).map(f).collect();
        }
        pool().install(|| (0..n).into_par_iter().map(&f).collect())
    }
}

#[cfg(not(feature = "parallel"))]
mod imp {
    pub fn threads() -> usize {
        1
    }

    pub fn map<T: Send>(n: usize, _sequential: bool, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        (0..n).map(f).collect()
    }
}

/// Number of workers used by [`map`].
pub fn threads() -> usize {
    imp::threads()
}

/// `(0..n).map(f)` evaluated on the worker pool, in order.
pub fn map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    imp::map(n, false, f)
}

/// As [`map`], forcing sequential evaluation when `sequential` is set.
pub fn map_with<T: Send>(n: usize, sequential: bool, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    imp::map(n, sequential, f)
}
