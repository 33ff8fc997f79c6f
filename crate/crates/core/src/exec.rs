//! Replicate execution: an order-preserving map over stream ids, run on a
//! thread pool when the `parallel` feature is enabled.

use std::ops::Range;

use crate::error::{Error, Result};

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "BIENAYME_THREADS";

pub struct Executor {
    threads: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor")
            .field("threads", &self.threads)
            .finish()
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Executor {
            threads: 1,
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    /// A pool with `threads` workers; 1 runs inline.
    pub fn with_threads(threads: usize) -> Result<Self> {
        if threads == 0 {
            return Err(Error::Config {
                path: THREADS_ENV.into(),
                message: "worker count must be positive".into(),
            });
        }
        #[cfg(feature = "parallel")]
        {
            if threads == 1 {
                return Ok(Self::sequential());
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Config {
                    path: THREADS_ENV.into(),
                    message: e.to_string(),
                })?;
            Ok(Executor {
                threads,
                pool: Some(pool),
            })
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = threads;
            Ok(Self::sequential())
        }
    }

    /// Worker count from `BIENAYME_THREADS`, else the available parallelism.
    pub fn from_env() -> Result<Self> {
        match std::env::var(THREADS_ENV) {
            Ok(v) => {
                let n: usize = v.trim().parse().map_err(|_| Error::Config {
                    path: THREADS_ENV.into(),
                    message: format!("expected a positive integer, got {v:?}"),
                })?;
                Self::with_threads(n)
            }
            Err(_) => {
                let n = std::thread::available_parallelism().map_or(1, |n| n.get());
                Self::with_threads(n)
            }
        }
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// `f` applied to every id in `range`, results in id order.
    pub fn map<T, F>(&self, range: Range<u64>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| range.into_par_iter().map(f).collect());
        }
        map_sequential(range, f)
    }

    /// Like [`Executor::map`], stopping at the first error in id order.
    pub fn try_map<T, F>(&self, range: Range<u64>, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64) -> Result<T> + Sync + Send,
    {
        self.map(range, f).into_iter().collect()
    }
}

pub fn map_sequential<T, F: Fn(u64) -> T>(range: Range<u64>, f: F) -> Vec<T> {
    range.map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let ex = Executor::with_threads(3).unwrap();
        let v = ex.map(0..100, |i| i * i);
        assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }
}
