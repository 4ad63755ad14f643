//! Parallel reduction over a range of sample indices.
//!
//! The range is cut into fixed blocks of [`BLOCK_SIZE`] indices. Each block is
//! reduced into its own accumulator and the block accumulators are merged in
//! index order, so the result does not depend on the worker count.

use rayon::prelude::*;

use crate::model::{GhzSpec, PhasePoint};
use crate::sampler::{GhzSampler, SampleStreamSpec, SamplingStats};
use crate::stats::Merge;
use crate::{Error, Result};

pub const BLOCK_SIZE: u64 = 1 << 14;

/// A rayon pool with a fixed number of workers.
pub struct Engine {
    pool: rayon::ThreadPool,
    workers: usize,
}

impl Engine {
    /// `workers == 0` selects the available parallelism.
    pub fn new(workers: usize) -> Result<Self> {
        let workers = if workers == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            workers
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::ThreadPool(e.to_string()))?;
        Ok(Self { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Runs `f` on the pool.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    /// Draws every sample of `stream` and folds it into an accumulator.
    ///
    /// `observe` receives the global index and the point.
    pub fn reduce<A, I, F>(
        &self,
        spec: &GhzSpec,
        stream: SampleStreamSpec,
        init: I,
        observe: F,
    ) -> Result<(A, SamplingStats)>
    where
        A: Merge + Send,
        I: Fn() -> A + Sync,
        F: Fn(&mut A, u64, &PhasePoint) + Sync,
    {
        let sampler = GhzSampler::new(*spec, stream.seed);
        let blocks = stream.count.div_ceil(BLOCK_SIZE);
        let partials: Vec<Result<(A, SamplingStats)>> = self.pool.install(|| {
            (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let start = stream.first_index + b * BLOCK_SIZE;
                    let end = (start + BLOCK_SIZE).min(stream.first_index + stream.count);
                    let mut acc = init();
                    let mut stats = SamplingStats::default();
                    let mut point = PhasePoint::with_capacity(spec.m());
                    for k in start..end {
                        stats.proposed += u64::from(sampler.draw_into(k, &mut point)?);
                        stats.accepted += 1;
                        observe(&mut acc, k, &point);
                    }
                    Ok((acc, stats))
                })
                .collect()
        });
        let mut acc = init();
        let mut stats = SamplingStats::default();
        for part in partials {
            let (a, s) = part?;
            acc.merge(a);
            stats.merge(s);
        }
        Ok((acc, stats))
    }
}

impl<A: Merge, B: Merge> Merge for (A, B) {
    fn merge(&mut self, other: Self) {
        self.0.merge(other.0);
        self.1.merge(other.1);
    }
}

impl<A: Merge> Merge for Vec<A> {
    /// Elementwise; both sides must have equal length.
    fn merge(&mut self, other: Self) {
        assert_eq!(self.len(), other.len());
        for (a, b) in self.iter_mut().zip(other) {
            a.merge(b);
        }
    }
}
