//! Cycle-approximate simulation of the accelerator.

pub mod arbiter;
pub mod att;
pub mod batch;
pub mod bound;
pub mod config;
pub mod fifo;
pub mod gcn;
pub mod ntn;
pub mod query;
pub mod report;

pub use arbiter::{Arbiter, Dispatch, PrevIterTable};
pub use att::{simulate_att, AttResult, AttTiming};
pub use batch::{batch_curve, batch_report, simulate_batch, BatchPoint, BatchReport};
pub use bound::{ft_bounds, lower_bound_cycles, LayerWork, WorkloadStats};
pub use config::{ArchConfig, LayerParams, Mode, PRESET_NAMES};
pub use fifo::Channel;
pub use gcn::{simulate_acg, simulate_ft_mult, AcgResult, FtInput, FtResult, Pack};
pub use ntn::{ntn_fcn_cycles, simulate_ntn_fcn, NtnResult};
pub use query::{simulate_queries, simulate_query, simulate_query_with, QueryResult};
pub use report::{CycleReport, LayerStats, ModuleCycles, Span, Timeline};
