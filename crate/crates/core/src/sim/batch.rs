//! Amortization of the per-invocation launch cost over a batch of queries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::SimGnnModel;
use crate::sim::config::ArchConfig;
use crate::sim::query::simulate_queries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub batch_size: usize,
    pub queries: usize,
    pub mean_kernel_cycles: f64,
    pub invocation_overhead: u64,
    pub avg_cycles_per_query: f64,
    pub replication: usize,
    /// Queries per million cycles across all replicated pipelines.
    pub throughput_per_mcycle: f64,
}

/// One point of an amortization curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchPoint {
    pub batch_size: usize,
    pub avg_cycles_per_query: f64,
    pub speedup_vs_batch1: f64,
}

pub fn avg_cycles_per_query(mean_kernel: f64, overhead: u64, batch_size: usize) -> f64 {
    overhead as f64 / batch_size as f64 + mean_kernel
}

/// Average cost per query and speedup over unbatched execution for each size.
pub fn batch_curve(mean_kernel: f64, overhead: u64, sizes: &[usize]) -> Vec<BatchPoint> {
    let single = avg_cycles_per_query(mean_kernel, overhead, 1);
    sizes
        .iter()
        .map(|&b| {
            let avg = avg_cycles_per_query(mean_kernel, overhead, b.max(1));
            BatchPoint {
                batch_size: b,
                avg_cycles_per_query: avg,
                speedup_vs_batch1: single / avg,
            }
        })
        .collect()
}

/// Builds the report from already measured kernel cycles.
pub fn batch_report(kernel_cycles: &[u64], cfg: &ArchConfig, batch_size: usize) -> Result<BatchReport> {
    if kernel_cycles.is_empty() {
        return Err(Error::EmptyQueryList);
    }
    if batch_size == 0 {
        return Err(Error::InvalidConfig("batch size must be >= 1".into()));
    }
    let mean = kernel_cycles.iter().sum::<u64>() as f64 / kernel_cycles.len() as f64;
    let avg = avg_cycles_per_query(mean, cfg.invocation_overhead, batch_size);
    Ok(BatchReport {
        batch_size,
        queries: kernel_cycles.len(),
        mean_kernel_cycles: mean,
        invocation_overhead: cfg.invocation_overhead,
        avg_cycles_per_query: avg,
        replication: cfg.replication,
        throughput_per_mcycle: cfg.replication as f64 * 1e6 / avg,
    })
}

pub fn simulate_batch(
    queries: &[(Graph, Graph)],
    model: &SimGnnModel<f64>,
    cfg: &ArchConfig,
    batch_size: usize,
) -> Result<BatchReport> {
    if queries.is_empty() {
        return Err(Error::EmptyQueryList);
    }
    let cycles: Vec<u64> = simulate_queries(queries, model, cfg)?
        .iter()
        .map(|r| r.report.total_kernel_cycles)
        .collect();
    batch_report(&cycles, cfg, batch_size)
}
