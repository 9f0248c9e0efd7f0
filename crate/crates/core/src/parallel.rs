//! Deterministic fixed-worker execution.
//!
//! Work is cut into jobs whose geometry depends only on the problem, never on
//! the worker count. Jobs are then dealt to workers in contiguous static
//! groups, so every output value is produced by the same arithmetic whatever
//! the number of workers and results are bit-identical across worker counts.
//!
//! With the `parallel` feature disabled every executor runs on the calling
//! thread and reports a single worker.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mem::Meter;
use crate::series::TimeSeries;
use crate::spectra::{self, EstimationConfig, SpectrumGrid};

/// How jobs are balanced across workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    /// Equal job counts per worker.
    #[default]
    RowBlocks,
    /// Equal output-point counts per worker.
    PointBlocks,
}

impl std::str::FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row_blocks" => Ok(Partition::RowBlocks),
            "point_blocks" => Ok(Partition::PointBlocks),
            other => Err(Error::config(
                "partition",
                format!("unknown partition {other:?}; expected row_blocks or point_blocks"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkerConfig {
    pub workers: usize,
    pub partition: Partition,
}

impl WorkerConfig {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::config("threads", "worker count must be at least 1"));
        }
        Ok(WorkerConfig {
            workers,
            partition: Partition::default(),
        })
    }

    pub fn single() -> Self {
        WorkerConfig {
            workers: 1,
            partition: Partition::default(),
        }
    }

    pub fn with_partition(mut self, partition: Partition) -> Self {
        self.partition = partition;
        self
    }
}

/// Splits `domain` into `workers.workers` contiguous parts whose sizes differ
/// by at most one; the larger parts come first.
pub fn partition_domain<T: Clone>(domain: &[T], workers: &WorkerConfig) -> Vec<Vec<T>> {
    let p = workers.workers.max(1);
    balanced_ranges(domain.len(), p)
        .into_iter()
        .map(|r| domain[r].to_vec())
        .collect()
}

fn balanced_ranges(len: usize, parts: usize) -> Vec<Range<usize>> {
    let base = len / parts;
    let extra = len % parts;
    let mut start = 0;
    (0..parts)
        .map(|i| {
            let size = base + usize::from(i < extra);
            let r = start..start + size;
            start += size;
            r
        })
        .collect()
}

/// Contiguous split where part `g` ends at the first job whose cumulative
/// weight reaches `(g + 1) / parts` of the total.
fn weighted_ranges(weights: &[usize], parts: usize) -> Vec<Range<usize>> {
    let total: usize = weights.iter().sum();
    let mut ranges = Vec::with_capacity(parts);
    let mut start = 0;
    let mut acc = 0usize;
    let mut idx = 0;
    for g in 0..parts {
        let target = ((g + 1) as u128 * total as u128 / parts as u128) as usize;
        while idx < weights.len() && (acc < target || g + 1 == parts) {
            acc += weights[idx];
            idx += 1;
        }
        ranges.push(start..idx);
        start = idx;
    }
    ranges
}

/// Runs job groups and data-parallel loops on a fixed number of workers.
pub struct Executor {
    workers: usize,
    partition: Partition,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor")
            .field("workers", &self.workers)
            .field("partition", &self.partition)
            .finish()
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Executor {
            workers: 1,
            partition: Partition::default(),
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    pub fn new(cfg: &WorkerConfig) -> Result<Self> {
        if cfg.workers == 0 {
            return Err(Error::config("threads", "worker count must be at least 1"));
        }
        #[cfg(feature = "parallel")]
        {
            let pool = if cfg.workers > 1 {
                Some(
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(cfg.workers)
                        .build()
                        .map_err(|e| Error::config("threads", e.to_string()))?,
                )
            } else {
                None
            };
            Ok(Executor {
                workers: cfg.workers,
                partition: cfg.partition,
                pool,
            })
        }
        #[cfg(not(feature = "parallel"))]
        Ok(Executor {
            workers: 1,
            partition: cfg.partition,
        })
    }

    /// Effective worker count.
    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn partition(&self) -> Partition {
        self.partition
    }

    fn group_ranges(&self, weights: &[usize]) -> Vec<Range<usize>> {
        let parts = self.workers.min(weights.len()).max(1);
        match self.partition {
            Partition::RowBlocks => balanced_ranges(weights.len(), parts),
            Partition::PointBlocks => weighted_ranges(weights, parts),
        }
    }

    /// Deals `jobs` to workers in contiguous groups and runs `f` once per
    /// group with a fresh meter. Returns each group's result with the
    /// meter's peak, in group order.
    pub(crate) fn run_groups<J, R, F>(
        &self,
        jobs: &[J],
        weight: impl Fn(&J) -> usize,
        f: F,
    ) -> Vec<(R, usize)>
    where
        J: Sync,
        R: Send,
        F: Fn(&[J], &Meter) -> R + Sync,
    {
        let weights: Vec<usize> = jobs.iter().map(weight).collect();
        let groups = self.group_ranges(&weights);
        let run = |r: &Range<usize>| {
            let meter = Meter::new();
            let out = f(&jobs[r.clone()], &meter);
            (out, meter.peak())
        };
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| groups.par_iter().map(run).collect());
        }
        groups.iter().map(run).collect()
    }

    /// Applies `f` to consecutive `chunk`-sized pieces of `data`. Pieces are
    /// disjoint, so the outcome does not depend on scheduling.
    pub(crate) fn for_each_chunk_mut<T, F>(&self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        if chunk == 0 {
            return;
        }
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            pool.install(|| {
                data.par_chunks_mut(chunk)
                    .enumerate()
                    .for_each(|(i, c)| f(i, c))
            });
            return;
        }
        data.chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
}

/// [`spectra::estimate_spectrum`] on `workers` workers. The grid is
/// bit-identical to the single-worker result.
pub fn parallel_estimate(
    series: &TimeSeries,
    cfg: &EstimationConfig,
    workers: &WorkerConfig,
) -> Result<SpectrumGrid> {
    let exec = Executor::new(workers)?;
    Ok(spectra::estimate_with(series, cfg, &exec)?.grid)
}
