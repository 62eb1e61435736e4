//! NTN and FCN modules: a fixed sequence of dense MVMs.

use crate::error::Result;
use crate::golden::{fcn, ntn, GraphEmbedding};
use crate::model::{Activation, SimGnnModel};
use crate::scalar::Scalar;
use crate::sim::config::ArchConfig;

/// Output of [`simulate_ntn_fcn`].
#[derive(Debug, Clone, PartialEq)]
pub struct NtnResult<T> {
    pub score: T,
    pub similarity: Vec<T>,
    pub cycles: u64,
}

/// Cycle count of NTN followed by the FCN chain; depends only on shapes.
pub fn ntn_fcn_cycles<T: Scalar>(model: &SimGnnModel<T>, cfg: &ArchConfig) -> u64 {
    let s = cfg.ntn_simd;
    let f = model.embedding_dim();
    let k = model.k();
    let bilinear = k * ((f * f).div_ceil(s) + f.div_ceil(s));
    let linear = (k * 2 * f).div_ceil(s);
    let act = match model.ntn_activation {
        Activation::Sigmoid => cfg.lat_sigmoid,
        Activation::Relu => 1,
    };
    let ntn = (bilinear + linear) as u64 + cfg.lat_acc + act;
    let fcn: u64 = model
        .fcn
        .iter()
        .map(|l| (l.f_in() * l.f_out()).div_ceil(s) as u64 + cfg.lat_acc)
        .sum();
    ntn + fcn + cfg.lat_sigmoid
}

pub fn simulate_ntn_fcn<T: Scalar>(
    hg1: &GraphEmbedding<T>,
    hg2: &GraphEmbedding<T>,
    model: &SimGnnModel<T>,
    cfg: &ArchConfig,
) -> Result<NtnResult<T>> {
    let similarity = ntn(hg1, hg2, model)?;
    let score = fcn(&similarity, model)?;
    Ok(NtnResult {
        score,
        similarity,
        cycles: ntn_fcn_cycles(model, cfg),
    })
}
