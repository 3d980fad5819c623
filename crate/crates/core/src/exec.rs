//! Index-parallel map. Output order always follows the input index, so results
//! never depend on the worker count.

/// Worker threads get a generous stack: the backward search recurses once per
/// second of encounter time.
const WORKER_STACK: usize = 64 * 1024 * 1024;

/// Maps `f` over `0..n` on `jobs` workers (0 = one per core).
#[cfg(feature = "parallel")]
pub fn par_map<T, F>(n: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    if jobs == 1 || n <= 1 {
        return sequential(n, f);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .stack_size(WORKER_STACK)
        .build()
        .expect("failed to start worker pool");
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, F>(n: usize, _jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    sequential(n, f)
}

fn sequential<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(WORKER_STACK)
            .spawn_scoped(s, || (0..n).map(&f).collect())
            .expect("failed to start worker thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

/// Worker count that `jobs = 0` resolves to.
pub fn available_jobs() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
