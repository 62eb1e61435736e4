//! Graph-similarity inference on a GCN dataflow accelerator, modeled in
//! software.
//!
//! The crate has two halves. [`golden`] is a plain reference forward pass
//! (three GCN layers, attention pooling, NTN, FCN). [`sim`] replays the same
//! computation on a cycle-approximate model of the accelerator and reports
//! where the cycles went. [`preproc`] holds the offline steps the accelerator
//! relies on: RAW-safe edge ordering, zero pruning and row padding.
//!
//! Numerical code is generic over [`Scalar`]; the reference runs in
//! [`Golden`] precision and the simulated datapath in [`Datapath`] precision.

pub mod error;
pub mod golden;
pub mod graph;
pub mod matrix;
pub mod model;
pub mod preproc;
pub mod scalar;
pub mod sim;
pub mod workload;

pub use error::{Error, Result};
pub use golden::{
    attention_pool, attention_weights, embed_nodes, fcn, gcn_layer, gcn_stack, gcn_stack_trace,
    graph_embedding, ntn, simgnn_score, GraphEmbedding,
};
pub use graph::{
    generate_synthetic, load_graph, normalize_adjacency, one_hot_features, save_graph,
    FeatureMatrix, Graph, NormalizedGraph, WeightedEdge, DEFAULT_VOCAB,
};
pub use matrix::Matrix;
pub use model::{
    load_model, random_model, save_model, Activation, Affine, GcnLayerWeights, SimGnnModel,
    DEFAULT_DIMS, DEFAULT_K,
};
pub use preproc::{
    pad_rows, padded_row_count, prune_pack, reorder_edges, verify_edge_stream, AddressedValue,
    EdgeStream, StreamEntry,
};
pub use scalar::Scalar;
pub use sim::{simulate_batch, simulate_query, ArchConfig, CycleReport, Mode, QueryResult};

/// Precision of the reference model.
pub type Golden = f64;
/// Precision of the simulated datapath.
pub type Datapath = f32;
pub type GoldenModel = SimGnnModel<Golden>;
pub type DatapathModel = SimGnnModel<Datapath>;
