//! Execution policy for independent evaluations.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] maps over
//! rayon's global pool. Without it every policy runs sequentially, so callers
//! never need to cfg-gate their own code. Output order always follows input
//! order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::Result;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this policy will actually fan out to worker threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Map over `0..n`.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Fallible map; the error reported is the one with the lowest index.
    pub fn try_map<T, R, F>(self, items: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> Result<R> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            let out: Vec<Result<R>> = items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect();
            return out.into_iter().collect();
        }
        items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
    }
}
