use fcp_core::Executor;
use rayon::prelude::*;

/// Replica fan-out over a rayon pool of `jobs` workers.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    pub fn new(jobs: Option<usize>) -> Self {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = jobs {
            b = b.num_threads(j.max(1));
        }
        RayonExecutor { pool: b.build().expect("thread pool") }
    }

    pub fn jobs(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for RayonExecutor {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..count).into_par_iter().map(job).collect())
    }
}
