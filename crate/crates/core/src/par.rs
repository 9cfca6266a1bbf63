//! Data-parallel execution with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Schedule::Parallel`] fans work out
//! over the rayon pool; without it every schedule runs sequentially. Output
//! order always follows input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    Sequential,
    #[default]
    Parallel,
}

impl Schedule {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Schedule::Parallel
    }
}

pub fn map<T, R, F>(items: Vec<T>, schedule: Schedule, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if schedule == Schedule::Parallel {
        return items.into_par_iter().map(f).collect();
    }
    let _ = schedule;
    items.into_iter().map(f).collect()
}
