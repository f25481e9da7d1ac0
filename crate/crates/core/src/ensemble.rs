//! Parallel, scheduling-independent execution of trajectory ensembles.
//!
//! Trajectory indices are cut into fixed-size chunks; chunks run on a rayon
//! pool and are merged in index order, so every statistic is identical for
//! any worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jump_engine::{
    reassign_work, simulate_batch, EngineContext, PopulationAccumulator, StepTable,
    TrajectoryRecord, LANES,
};
use crate::model::{Order, SystemConfig};
use crate::stats::{entropy_production, free_energy_difference, WorkEnsemble};

/// Trajectories per scheduling unit; fixed so that merges never depend on
/// the worker count.
pub const CHUNK: u64 = 16 * LANES as u64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub index: u64,
    /// W⁽ⁿ′⁾ for n′ = 0, 1, 2.
    pub work: [f64; 3],
    pub delta_e: f64,
    /// Entropy production R of the dynamics-order trajectory.
    pub entropy: f64,
    pub jumps: [u64; 3],
}

impl TrajectorySummary {
    pub fn from_record(record: &TrajectoryRecord, config: &SystemConfig) -> Self {
        let work = [0, 1, 2].map(|n| reassign_work(record, n, config).expect("valid order"));
        TrajectorySummary {
            index: record.index,
            work,
            delta_e: record.delta_e(),
            entropy: entropy_production(record, config),
            jumps: record.jump_counts(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnsembleOptions {
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    pub populations: bool,
    pub keep_records: bool,
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub order: Order,
    pub summaries: Vec<TrajectorySummary>,
    pub populations: Option<PopulationAccumulator>,
    pub records: Option<Vec<TrajectoryRecord>>,
    pub delta_f: f64,
    pub warnings: Vec<String>,
}

impl EnsembleResult {
    /// Work samples of the first `count` trajectories with heats from frame `n_prime`.
    pub fn work(&self, n_prime: Order, count: usize) -> Result<WorkEnsemble> {
        let samples = self
            .summaries
            .iter()
            .take(count)
            .map(|s| s.work[n_prime.index()])
            .collect();
        WorkEnsemble::new(samples, self.order, n_prime)
    }

    pub fn entropy(&self, count: usize) -> Vec<f64> {
        self.summaries.iter().take(count).map(|s| s.entropy).collect()
    }

    pub fn len(&self) -> usize {
        self.summaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summaries.is_empty()
    }
}

struct ChunkResult {
    summaries: Vec<TrajectorySummary>,
    populations: Option<PopulationAccumulator>,
    records: Option<Vec<TrajectoryRecord>>,
}

fn run_chunk(
    table: &StepTable,
    ctx: &EngineContext,
    start: u64,
    end: u64,
    options: &EnsembleOptions,
) -> ChunkResult {
    let mut pops = options
        .populations
        .then(|| PopulationAccumulator::new(ctx.output_steps.len()));
    let mut summaries = Vec::with_capacity((end - start) as usize);
    let mut records = options.keep_records.then(Vec::new);
    let mut first = start;
    while first < end {
        let count = (end - first).min(LANES as u64) as usize;
        let batch = simulate_batch(table, ctx, first, count, pops.as_mut());
        summaries.extend(batch.iter().map(|r| TrajectorySummary::from_record(r, &ctx.config)));
        if let Some(keep) = records.as_mut() {
            keep.extend(batch);
        }
        first += count as u64;
    }
    ChunkResult {
        summaries,
        populations: pops,
        records,
    }
}

/// Runs trajectories 0..n_traj of the given dynamics order.
pub fn run_ensemble(
    config: &SystemConfig,
    order: Order,
    n_traj: u64,
    options: &EnsembleOptions,
) -> Result<EnsembleResult> {
    config.validate()?;
    if n_traj == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let table = StepTable::new(config, order);
    let ctx = EngineContext::new(config);
    let chunks: Vec<(u64, u64)> = (0..n_traj.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(n_traj)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    let parts: Vec<ChunkResult> = pool.install(|| {
        chunks
            .par_iter()
            .map(|&(s, e)| run_chunk(&table, &ctx, s, e, options))
            .collect()
    });

    let mut summaries = Vec::with_capacity(n_traj as usize);
    let mut populations = options
        .populations
        .then(|| PopulationAccumulator::new(ctx.output_steps.len()));
    let mut records = options.keep_records.then(Vec::new);
    for part in parts {
        summaries.extend(part.summaries);
        if let (Some(acc), Some(p)) = (populations.as_mut(), part.populations.as_ref()) {
            acc.merge(p);
        }
        if let (Some(all), Some(r)) = (records.as_mut(), part.records) {
            all.extend(r);
        }
    }
    Ok(EnsembleResult {
        order,
        summaries,
        populations,
        records,
        delta_f: free_energy_difference(config, config.t_init(), config.t_final()) + 0.0,
        warnings: ctx.warnings(),
    })
}
