//! Replica fan-out.
//!
//! Estimators hand an index-addressed job to an [`Executor`]; results come
//! back in index order, so a parallel executor produces the same output as
//! [`Sequential`].

use alloc::vec::Vec;

pub trait Executor: Sync {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(job).collect()
    }
}
