//! Cycle accounting produced by every simulation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::sim::config::Mode;

/// Activity of one module. `idle` is filled in when the report is finalized
/// so that the three counters always sum to the report total.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleCycles {
    pub active: u64,
    pub bubble: u64,
    pub idle: u64,
}

impl ModuleCycles {
    pub fn total(&self) -> u64 {
        self.active + self.bubble + self.idle
    }

    pub(crate) fn absorb(&mut self, other: &ModuleCycles) {
        self.active += other.active;
        self.bubble += other.bubble;
    }
}

/// Work counters for one GCN layer, summed over both graphs of a query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerStats {
    /// Input elements streamed into the MULT module (padding included).
    pub input_elements: u64,
    /// Nonzero input elements.
    pub input_nonzeros: u64,
    /// Rows of the features buffer after padding.
    pub buffer_rows: u64,
    pub dispatches: u64,
    pub products: u64,
    pub mult_active: u64,
    pub mult_bubble: u64,
    pub bank_conflicts: u64,
    pub edge_entries: u64,
    pub edge_bubbles: u64,
    pub agg_cycles: u64,
    pub out_cycles: u64,
    /// Elements forwarded to the next stage after pruning (or all of them
    /// when not pruning).
    pub forwarded: u64,
}

impl LayerStats {
    pub(crate) fn absorb(&mut self, o: &LayerStats) {
        self.input_elements += o.input_elements;
        self.input_nonzeros += o.input_nonzeros;
        self.buffer_rows += o.buffer_rows;
        self.dispatches += o.dispatches;
        self.products += o.products;
        self.mult_active += o.mult_active;
        self.mult_bubble += o.mult_bubble;
        self.bank_conflicts += o.bank_conflicts;
        self.edge_entries += o.edge_entries;
        self.edge_bubbles += o.edge_bubbles;
        self.agg_cycles += o.agg_cycles;
        self.out_cycles += o.out_cycles;
        self.forwarded += o.forwarded;
    }

    /// Cycles the MULT module spent issuing or stalled on RAW hazards.
    pub fn ft_cycles(&self) -> u64 {
        self.mult_active + self.mult_bubble
    }
}

/// Start/end cycles of one stage (`end` exclusive).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: u64,
    pub end: u64,
}

impl Span {
    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// When each top-level stage of a query ran.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeline {
    pub gcn: [Span; 2],
    pub att: [Span; 2],
    pub ntn_fcn: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub mode: Mode,
    pub total_kernel_cycles: u64,
    pub modules: BTreeMap<String, ModuleCycles>,
    pub fifo_max_occupancy: BTreeMap<String, usize>,
    pub layers: Vec<LayerStats>,
    pub dispatch_conflicts: u64,
    /// Accumulator commits checked against the RAW window.
    pub raw_checks: u64,
    pub timeline: Timeline,
}

impl CycleReport {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            total_kernel_cycles: 0,
            modules: BTreeMap::new(),
            fifo_max_occupancy: BTreeMap::new(),
            layers: vec![LayerStats::default(); 3],
            dispatch_conflicts: 0,
            raw_checks: 0,
            timeline: Timeline::default(),
        }
    }

    pub(crate) fn add_module(&mut self, name: &str, c: &ModuleCycles) {
        self.modules.entry(name.to_string()).or_default().absorb(c);
    }

    pub(crate) fn note_fifo(&mut self, name: &str, occupancy: usize) {
        let e = self.fifo_max_occupancy.entry(name.to_string()).or_default();
        *e = (*e).max(occupancy);
    }

    /// Sets the total and derives every module's idle count from it.
    pub(crate) fn finalize(&mut self, total: u64) {
        self.total_kernel_cycles = total;
        for (name, m) in self.modules.iter_mut() {
            let busy = m.active + m.bubble;
            assert!(busy <= total, "module {name} busy {busy} > total {total}");
            m.idle = total - busy;
        }
    }

    /// Sum of the two GCN spans.
    pub fn gcn_cycles(&self) -> u64 {
        self.timeline.gcn.iter().map(Span::len).sum()
    }

    /// Share of MULT and aggregation cycles lost to bubbles.
    pub fn bubble_fraction(&self) -> f64 {
        let (mut busy, mut bubble) = (0u64, 0u64);
        for (name, m) in &self.modules {
            if name.starts_with("mult") || name.starts_with("acg") {
                busy += m.active + m.bubble;
                bubble += m.bubble;
            }
        }
        if busy == 0 {
            0.0
        } else {
            bubble as f64 / busy as f64
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `module,active,bubble,idle` rows followed by a totals row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("module,active,bubble,idle\n");
        let mut sum = ModuleCycles::default();
        for (name, m) in &self.modules {
            writeln!(out, "{name},{},{},{}", m.active, m.bubble, m.idle).unwrap();
            sum.active += m.active;
            sum.bubble += m.bubble;
            sum.idle += m.idle;
        }
        writeln!(out, "total,{},{},{}", sum.active, sum.bubble, sum.idle).unwrap();
        out
    }
}
