//! Analytical minimum latency of the GCN stages.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::golden::gcn_stack_trace;
use crate::graph::{normalize_adjacency, one_hot_features, Graph};
use crate::model::SimGnnModel;
use crate::sim::config::{ArchConfig, LayerParams, Mode};

/// Shape and sparsity of one layer's work on one graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerWork {
    pub rows: usize,
    pub f_in: usize,
    pub f_out: usize,
    /// Nonzeros of the layer input.
    pub nnz: usize,
    /// Entries of the normalized adjacency.
    pub edges: usize,
}

/// Per-graph, per-layer work of a set of graphs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WorkloadStats {
    pub graphs: Vec<[LayerWork; 3]>,
}

impl WorkloadStats {
    /// Measures input sparsity of every layer with a golden forward pass.
    pub fn measure(graphs: &[&Graph], model: &SimGnnModel<f64>) -> Result<Self> {
        let mut out = Vec::with_capacity(graphs.len());
        for g in graphs {
            let h0 = one_hot_features::<f64>(g, model.input_features())?;
            let norm = normalize_adjacency::<f64>(g);
            let trace = gcn_stack_trace(&h0, &norm, model)?;
            let work: Vec<LayerWork> = (0..3)
                .map(|l| LayerWork {
                    rows: g.num_nodes(),
                    f_in: model.gcn[l].f_in(),
                    f_out: model.gcn[l].f_out(),
                    nnz: trace[l].count_nonzero(),
                    edges: norm.num_entries(),
                })
                .collect();
            out.push(work.try_into().expect("three layers"));
        }
        Ok(Self { graphs: out })
    }

    pub fn for_query(g1: &Graph, g2: &Graph, model: &SimGnnModel<f64>) -> Result<Self> {
        Self::measure(&[g1, g2], model)
    }

    /// Fraction of zero inputs of layer `l` over all graphs.
    pub fn input_sparsity(&self, l: usize) -> f64 {
        let (zeros, total) = self.graphs.iter().fold((0usize, 0usize), |(z, t), g| {
            let w = &g[l];
            (z + w.rows * w.f_in - w.nnz, t + w.rows * w.f_in)
        });
        if total == 0 {
            0.0
        } else {
            zeros as f64 / total as f64
        }
    }
}

/// Minimum MULT issue cycles of one layer on one graph.
pub fn ft_bound(work: &LayerWork, params: &LayerParams, mode: Mode) -> u64 {
    let chunks = params.ft_chunks(work.f_out) as u64;
    if mode.is_sparse() {
        work.nnz.div_ceil(params.df) as u64 * chunks
    } else {
        (work.rows.div_ceil(params.df) * work.f_in) as u64 * chunks
    }
}

/// Minimum aggregation cycles of one layer on one graph.
pub fn agg_bound(work: &LayerWork, params: &LayerParams) -> u64 {
    (work.edges * params.agg_chunks(work.f_out)) as u64
}

/// Per-layer FT bound summed over all graphs.
pub fn ft_bounds(stats: &WorkloadStats, cfg: &ArchConfig) -> [u64; 3] {
    std::array::from_fn(|l| {
        stats
            .graphs
            .iter()
            .map(|g| ft_bound(&g[l], &cfg.layers[l], cfg.mode))
            .sum()
    })
}

/// Largest per-stage bound; no schedule can finish faster.
pub fn lower_bound_cycles(stats: &WorkloadStats, cfg: &ArchConfig) -> u64 {
    let ft = ft_bounds(stats, cfg);
    (0..3)
        .flat_map(|l| {
            let agg: u64 = stats.graphs.iter().map(|g| agg_bound(&g[l], &cfg.layers[l])).sum();
            [ft[l], agg]
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_hand_trace() {
        let w = LayerWork { rows: 8, f_in: 4, f_out: 32, nnz: 32, edges: 0 };
        let p = LayerParams { simd_ft: 16, simd_agg: 16, df: 8, p: None };
        assert_eq!(ft_bound(&w, &p, Mode::InterLayerPipeline), 8);
    }

    #[test]
    fn empty_layer_contributes_nothing() {
        let w = LayerWork { rows: 8, f_in: 4, f_out: 32, nnz: 0, edges: 0 };
        let p = LayerParams { simd_ft: 16, simd_agg: 16, df: 2, p: Some(8) };
        assert_eq!(ft_bound(&w, &p, Mode::ExtendedSparsity), 0);
        assert_eq!(agg_bound(&w, &p), 0);
    }
}
