//! Whole-query composition: two GCN passes sharing one module set, attention
//! overlapped with the second GCN pass, then NTN and FCN.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::Graph;
use crate::model::SimGnnModel;
use crate::scalar::Scalar;
use crate::sim::att::{att_schedule, att_values};
use crate::sim::config::ArchConfig;
use crate::sim::gcn::run_graph;
use crate::sim::ntn::simulate_ntn_fcn;
use crate::sim::report::{CycleReport, ModuleCycles, Span};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub score: f64,
    pub report: CycleReport,
}

/// Simulates a query on a datapath of scalar type `T`.
pub fn simulate_query_with<T: Scalar>(
    g1: &Graph,
    g2: &Graph,
    model: &SimGnnModel<T>,
    cfg: &ArchConfig,
) -> Result<QueryResult> {
    cfg.validate_for(model)?;
    g1.check_vocab(model.input_features())?;
    g2.check_vocab(model.input_features())?;
    let width = model.embedding_dim();
    let mut report = CycleReport::new(cfg.mode);

    let run1 = run_graph(g1, model, cfg, 0, &mut report)?;
    let att1 = att_schedule(&run1.arrivals, 0, width, cfg);
    let run2 = run_graph(g2, model, cfg, run1.span.end, &mut report)?;
    let att2 = att_schedule(&run2.arrivals, att1.span.end, width, cfg);

    let hg1 = att_values(&run1.embeddings, &model.att)?;
    let hg2 = att_values(&run2.embeddings, &model.att)?;
    let tail = simulate_ntn_fcn(&hg1, &hg2, model, cfg)?;
    let ntn_start = att2.span.end.max(run2.span.end);
    let ntn_span = Span { start: ntn_start, end: ntn_start + tail.cycles };

    report.add_module("att", &ModuleCycles { active: att1.active + att2.active, ..Default::default() });
    report.add_module("ntn_fcn", &ModuleCycles { active: tail.cycles, ..Default::default() });
    report.timeline.gcn = [run1.span, run2.span];
    report.timeline.att = [att1.span, att2.span];
    report.timeline.ntn_fcn = ntn_span;
    report.finalize(ntn_span.end);
    Ok(QueryResult {
        score: tail.score.as_f64(),
        report,
    })
}

/// Simulates a query on the 32-bit datapath.
pub fn simulate_query(g1: &Graph, g2: &Graph, model: &SimGnnModel<f64>, cfg: &ArchConfig) -> Result<QueryResult> {
    simulate_query_with(g1, g2, &model.cast::<f32>(), cfg)
}

/// Simulates independent queries in parallel; results keep input order.
pub fn simulate_queries(
    queries: &[(Graph, Graph)],
    model: &SimGnnModel<f64>,
    cfg: &ArchConfig,
) -> Result<Vec<QueryResult>> {
    let datapath = model.cast::<f32>();
    queries
        .par_iter()
        .map(|(a, b)| simulate_query_with(a, b, &datapath, cfg))
        .collect()
}
