//! Monte Carlo parameters, the worker pool and order-stable reductions.
//!
//! Per-path results are always collected in path order and reduced
//! sequentially, so estimates do not depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{LevyTriple, SimScheme};
use crate::report::Estimate;

/// Environment variable read when no worker count is given explicitly.
pub const WORKERS_ENV: &str = "LEVYSYM_WORKERS";

fn default_truncation() -> u32 {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McParams {
    pub paths: usize,
    /// Time steps `K` on the experiment horizon.
    pub steps: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Small-jump truncation index `n` (jumps with `|y| <= 1/n` are dropped).
    #[serde(default = "default_truncation")]
    pub truncation: u32,
    /// Gaussian padding `eps_n`; `None` means `1/n^2`, `Some(0.0)` disables it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

impl McParams {
    pub fn new(paths: usize, steps: usize, seed: u64) -> Self {
        Self { paths, steps, seed, workers: None, truncation: default_truncation(), eps: None }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn with_truncation(mut self, n: u32) -> Self {
        self.truncation = n;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 paths, got {}", self.paths)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParameter("need at least 1 time step".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidParameter("worker count must be positive".into()));
        }
        Ok(())
    }

    pub fn scheme(&self, t: &LevyTriple) -> Result<SimScheme> {
        match self.eps {
            None => SimScheme::with_default_padding(t, self.truncation),
            Some(e) if e == 0.0 => SimScheme::unpadded(t, self.truncation),
            Some(e) => SimScheme::truncate(t, self.truncation, e),
        }
    }

    pub fn worker_count(&self) -> usize {
        resolve_workers(self.workers)
    }
}

/// Explicit count, else the environment variable, else 1.
pub fn resolve_workers(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&w| w > 0)
        .unwrap_or(1)
}

/// `f(0), ..., f(count - 1)` in order, computed on `workers` threads.
pub fn par_map<R, F>(count: usize, workers: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    if workers <= 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}

/// Sample mean and its standard error, summed in index order.
pub fn mean_se(values: &[f64]) -> Estimate {
    let n = values.len();
    if n == 0 {
        return Estimate::new(f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Estimate::new(mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    Estimate::new(mean, (var / n as f64).sqrt())
}

/// Estimates of `a`, `b` and of `a - b` from paired samples.
pub fn paired(a: &[f64], b: &[f64]) -> (Estimate, Estimate, Estimate) {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    (mean_se(a), mean_se(b), mean_se(&diff))
}
