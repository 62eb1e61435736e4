//! Architecture parameters of the simulated accelerator.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SimGnnModel;
use crate::scalar::Scalar;

/// How the three GCN layers are mapped onto hardware.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// One MULT/ACG module pair reused for every layer; intermediate results
    /// make a round trip through global memory.
    Baseline,
    /// Dedicated modules per layer connected by FIFOs, dense feature
    /// transformation.
    InterLayerPipeline,
    /// Inter-layer pipeline plus zero pruning, P input FIFOs and an arbiter
    /// in front of every MULT module.
    ExtendedSparsity,
}

impl Mode {
    pub fn is_sparse(self) -> bool {
        matches!(self, Mode::ExtendedSparsity)
    }
}

/// Parallelization factors of one GCN layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerParams {
    /// Output features produced per cycle by one MULT PE.
    pub simd_ft: usize,
    /// Output features updated per cycle during aggregation.
    pub simd_agg: usize,
    /// Duplication factor: PEs working on distinct rows.
    pub df: usize,
    /// Number of pruned-input FIFOs; only meaningful with sparsity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
}

impl LayerParams {
    /// Cycles a MULT PE spends on one input element.
    pub fn ft_chunks(&self, f_out: usize) -> usize {
        f_out.div_ceil(self.simd_ft)
    }

    /// Cycles the aggregation engine spends on one edge.
    pub fn agg_chunks(&self, f_out: usize) -> usize {
        f_out.div_ceil(self.simd_agg)
    }
}

fn one() -> u64 {
    1
}
fn sixteen() -> usize {
    16
}
fn eight() -> u64 {
    8
}
fn one_usize() -> usize {
    1
}

/// Full accelerator configuration, serialized as the config-file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchConfig {
    #[serde(default)]
    pub name: String,
    pub mode: Mode,
    /// Per-layer parameters, always three entries.
    pub layers: Vec<LayerParams>,
    /// Multiplier latency in cycles.
    pub lat_mult: u64,
    /// Accumulator latency in cycles; the RAW window of every accumulation.
    pub lat_acc: u64,
    pub fifo_depth: usize,
    /// Host-side launch cost charged once per kernel invocation.
    pub invocation_overhead: u64,
    /// Global-memory read cost per element.
    #[serde(default = "one")]
    pub mem_read_cycles_per_element: u64,
    /// Global-memory write cost per element.
    #[serde(default = "one")]
    pub mem_write_cycles_per_element: u64,
    #[serde(default = "sixteen")]
    pub att_simd: usize,
    #[serde(default = "sixteen")]
    pub ntn_simd: usize,
    #[serde(default = "eight")]
    pub lat_tanh: u64,
    #[serde(default = "eight")]
    pub lat_sigmoid: u64,
    /// Number of replicated pipelines; scales reported throughput only.
    #[serde(default = "one_usize")]
    pub replication: usize,
}

const BASELINE_JSON: &str = include_str!("../../presets/baseline.json");
const PIPELINED_JSON: &str = include_str!("../../presets/pipelined.json");
const SPARSE_JSON: &str = include_str!("../../presets/sparse.json");

/// Names accepted by [`ArchConfig::preset`].
pub const PRESET_NAMES: [&str; 3] = ["baseline", "pipelined", "sparse"];

impl ArchConfig {
    pub fn preset(name: &str) -> Option<ArchConfig> {
        let text = match name {
            "baseline" => BASELINE_JSON,
            "pipelined" => PIPELINED_JSON,
            "sparse" => SPARSE_JSON,
            _ => return None,
        };
        Some(Self::from_json(text).expect("shipped presets are valid"))
    }

    pub fn baseline() -> ArchConfig {
        Self::preset("baseline").expect("preset")
    }

    pub fn pipelined() -> ArchConfig {
        Self::preset("pipelined").expect("preset")
    }

    pub fn sparse() -> ArchConfig {
        Self::preset("sparse").expect("preset")
    }

    pub fn from_json(text: &str) -> Result<ArchConfig> {
        let cfg: ArchConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Loads a config file, or a shipped preset when `path_or_preset` names one
    /// and no such file exists.
    pub fn load(path_or_preset: impl AsRef<Path>) -> Result<ArchConfig> {
        let path = path_or_preset.as_ref();
        if !path.exists() {
            if let Some(cfg) = path.to_str().and_then(Self::preset) {
                return Ok(cfg);
            }
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn layer(&self, l: usize) -> &LayerParams {
        &self.layers[l]
    }

    /// Structural checks independent of any model.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.layers.len() != 3 {
            return bad(format!("expected 3 layer entries, found {}", self.layers.len()));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.simd_ft == 0 || l.simd_agg == 0 || l.df == 0 {
                return bad(format!("layer {}: parallelization factors must be >= 1", i + 1));
            }
            if self.mode.is_sparse() {
                match l.p {
                    None => return bad(format!("layer {}: sparse mode needs p", i + 1)),
                    Some(0) => return bad(format!("layer {}: p must be >= 1", i + 1)),
                    Some(p) if l.df > p => {
                        return bad(format!("layer {}: df {} exceeds p {}", i + 1, l.df, p))
                    }
                    Some(_) => {}
                }
            }
        }
        if self.mode == Mode::Baseline && self.layers.iter().any(|l| *l != self.layers[0]) {
            return bad("baseline mode shares one module set; layer entries must be identical".into());
        }
        if self.lat_mult == 0 || self.lat_acc == 0 || self.lat_tanh == 0 || self.lat_sigmoid == 0 {
            return bad("latencies must be >= 1 cycle".into());
        }
        if self.fifo_depth == 0 {
            return bad("fifo_depth must be >= 1".into());
        }
        if self.att_simd == 0 || self.ntn_simd == 0 || self.replication == 0 {
            return bad("att_simd, ntn_simd and replication must be >= 1".into());
        }
        Ok(())
    }

    /// Checks that every `simd_ft` divides its layer's output width.
    pub fn validate_for<T: Scalar>(&self, model: &SimGnnModel<T>) -> Result<()> {
        self.validate()?;
        model.validate()?;
        for (i, (lp, layer)) in self.layers.iter().zip(&model.gcn).enumerate() {
            if layer.f_out() % lp.simd_ft != 0 {
                return Err(Error::InvalidConfig(format!(
                    "layer {}: simd_ft {} does not divide f_out {}",
                    i + 1,
                    lp.simd_ft,
                    layer.f_out()
                )));
            }
        }
        Ok(())
    }
}
