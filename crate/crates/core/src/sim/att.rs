//! Attention pooling module.

use crate::error::{Error, Result};
use crate::golden::GraphEmbedding;
use crate::graph::FeatureMatrix;
use crate::matrix::{dot, Matrix};
use crate::scalar::Scalar;
use crate::sim::config::ArchConfig;
use crate::sim::report::Span;

/// Cycle accounting of one attention pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttTiming {
    pub span: Span,
    /// Cycles in which a MAC lane was issuing.
    pub active: u64,
}

/// Output of [`simulate_att`].
#[derive(Debug, Clone, PartialEq)]
pub struct AttResult<T> {
    pub embedding: GraphEmbedding<T>,
    pub timing: AttTiming,
}

/// Schedules attention over nodes arriving at `arrivals`, starting no earlier
/// than `not_before`. Stages: per-node context MVM (`F*F` MACs each), the
/// accumulator and tanh latencies, per-node score dot products, the sigmoid
/// latency, then the final weighted sum over nodes.
pub(crate) fn att_schedule(arrivals: &[u64], not_before: u64, width: usize, cfg: &ArchConfig) -> AttTiming {
    let n = arrivals.len() as u64;
    let mvm = (width * width).div_ceil(cfg.att_simd) as u64;
    let vec = width.div_ceil(cfg.att_simd) as u64;
    let start = arrivals.first().map_or(not_before, |&a| a.max(not_before));
    let mut t = not_before;
    for &a in arrivals {
        t = t.max(a) + mvm;
    }
    let context_ready = t + cfg.lat_acc + cfg.lat_tanh;
    let scores_ready = context_ready + n * vec + cfg.lat_acc + cfg.lat_sigmoid;
    let end = scores_ready + n * vec + cfg.lat_acc;
    AttTiming {
        span: Span { start, end },
        active: n * (mvm + 2 * vec),
    }
}

/// Attention in the order the hardware evaluates it: the context vector is
/// accumulated as a sum of per-node products `att * h_n`.
pub(crate) fn att_values<T: Scalar>(h: &FeatureMatrix<T>, att: &Matrix<T>) -> Result<GraphEmbedding<T>> {
    if att.rows() != att.cols() || h.cols() != att.cols() {
        return Err(Error::dims("attention width", att.cols(), h.cols()));
    }
    if h.rows() == 0 {
        return Err(Error::dims("attention node count", 1, 0));
    }
    let mut ctx = vec![T::zero(); h.cols()];
    for r in 0..h.rows() {
        for (c, p) in ctx.iter_mut().zip(att.mul_vec(h.row(r))?) {
            *c += p;
        }
    }
    let scale = T::one() / T::of(h.rows() as f64);
    ctx.iter_mut().for_each(|c| *c = (*c * scale).tanh());
    let weights: Vec<T> = (0..h.rows()).map(|r| dot(h.row(r), &ctx).sigmoid()).collect();
    let mut values = vec![T::zero(); h.cols()];
    for (r, &a) in weights.iter().enumerate() {
        for (g, &v) in values.iter_mut().zip(h.row(r)) {
            *g += a * v;
        }
    }
    Ok(GraphEmbedding { values })
}

/// Attention over a fully available node-embedding matrix.
pub fn simulate_att<T: Scalar>(h: &FeatureMatrix<T>, att: &Matrix<T>, cfg: &ArchConfig) -> Result<AttResult<T>> {
    let embedding = att_values(h, att)?;
    let timing = att_schedule(&vec![0; h.rows()], 0, h.cols(), cfg);
    Ok(AttResult { embedding, timing })
}
