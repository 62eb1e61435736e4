//! Cycle-stepped model of the GCN layers: input readers, MULT modules
//! (dense packs or arbitrated pruned FIFOs), ACG modules and the FIFOs
//! between them.

use crate::error::{Error, Result};
use crate::graph::{normalize_adjacency, one_hot_features, FeatureMatrix, Graph};
use crate::matrix::Matrix;
use crate::model::{Affine, SimGnnModel};
use crate::preproc::{padded_row_count, prune_pack, reorder_edges, AddressedValue, StreamEntry};
use crate::scalar::Scalar;
use crate::sim::arbiter::{Arbiter, Dispatch, PrevIterTable};
use crate::sim::config::{ArchConfig, LayerParams, Mode};
use crate::sim::fifo::Channel;
use crate::sim::report::{CycleReport, LayerStats, ModuleCycles, Span};

/// `df` vertically adjacent elements of one feature column.
#[derive(Debug, Clone, PartialEq)]
pub struct Pack<T> {
    pub col: usize,
    pub row_base: usize,
    pub values: Vec<T>,
}

/// Output of one MULT issue cycle: for every lane, the products of its input
/// element with one `simd_ft` slice of the weight row.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ProductGroup<T> {
    Products { chunk: usize, lanes: Vec<(usize, Vec<T>)> },
    End,
}

/// Input side of a MULT module.
#[derive(Debug)]
pub(crate) enum Feed<T> {
    Dense(Channel<Pack<T>>),
    Sparse(Vec<Channel<AddressedValue<T>>>),
}

impl<T> Feed<T> {
    pub(crate) fn dense(depth: usize) -> Self {
        Feed::Dense(Channel::new(depth))
    }

    pub(crate) fn sparse(p: usize, depth: usize) -> Self {
        Feed::Sparse((0..p).map(|_| Channel::new(depth)).collect())
    }

    fn is_drained(&self) -> bool {
        match self {
            Feed::Dense(c) => c.is_drained(),
            Feed::Sparse(cs) => cs.iter().all(Channel::is_drained),
        }
    }

    fn close(&mut self) {
        match self {
            Feed::Dense(c) => c.close(),
            Feed::Sparse(cs) => cs.iter_mut().for_each(Channel::close),
        }
    }

    fn note_occupancy(&self, layer: usize, report: &mut CycleReport) {
        match self {
            Feed::Dense(c) => report.note_fifo(&format!("l{}.in", layer + 1), c.max_occupancy()),
            Feed::Sparse(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    report.note_fifo(&format!("l{}.in{i}", layer + 1), c.max_occupancy());
                }
            }
        }
    }
}

/// Reads the first layer's input from global memory.
#[derive(Debug)]
pub(crate) enum Source<T> {
    Dense { items: Vec<(Pack<T>, u64)>, next: usize, progress: u64 },
    Sparse { items: Vec<AddressedValue<T>>, cost: u64, next: usize, progress: u64 },
}

impl<T: Scalar> Source<T> {
    /// Column-major packs of `h` (already padded); only the first
    /// `real_rows` rows cost memory reads.
    pub(crate) fn dense(h: &FeatureMatrix<T>, real_rows: usize, df: usize, read_cost: u64) -> Self {
        let mut items = Vec::with_capacity(h.rows().div_ceil(df) * h.cols());
        for col in 0..h.cols() {
            for base in (0..h.rows()).step_by(df) {
                let values: Vec<T> = (base..base + df).map(|r| h[(r, col)]).collect();
                let real = (base..base + df).filter(|&r| r < real_rows).count() as u64;
                items.push((Pack { col, row_base: base, values }, real * read_cost));
            }
        }
        Source::Dense { items, next: 0, progress: 0 }
    }

    pub(crate) fn sparse(values: Vec<AddressedValue<T>>, read_cost: u64) -> Self {
        Source::Sparse { items: values, cost: read_cost, next: 0, progress: 0 }
    }

    /// Returns true when the cycle was spent reading memory.
    fn tick(&mut self, t: u64, feed: &mut Feed<T>) -> bool {
        match (self, feed) {
            (Source::Dense { items, next, progress }, Feed::Dense(ch)) => {
                let Some((pack, cost)) = items.get(*next) else {
                    if !ch.is_closed() {
                        ch.close();
                    }
                    return false;
                };
                let active = *progress < *cost;
                if active {
                    *progress += 1;
                }
                if *progress >= *cost && ch.can_push() {
                    ch.push(pack.clone(), t + 1);
                    *next += 1;
                    *progress = 0;
                }
                active
            }
            (Source::Sparse { items, cost, next, progress }, Feed::Sparse(chs)) => {
                let Some(v) = items.get(*next) else {
                    chs.iter_mut().filter(|c| !c.is_closed()).for_each(Channel::close);
                    return false;
                };
                let lane = *next % chs.len();
                let active = *progress < *cost;
                if active {
                    *progress += 1;
                }
                if *progress >= *cost && chs[lane].can_push() {
                    chs[lane].push(*v, t + 1);
                    *next += 1;
                    *progress = 0;
                }
                active
            }
            _ => unreachable!("source and feed kinds always match"),
        }
    }

    fn work(&self) -> u64 {
        match self {
            Source::Dense { items, .. } => items.iter().map(|(_, c)| c + 1).sum(),
            Source::Sparse { items, cost, .. } => items.len() as u64 * (cost + 1),
        }
    }
}

/// MULT module: each issue cycle multiplies up to `df` input elements (one
/// per PE) by a `simd_ft`-wide slice of their weight rows.
#[derive(Debug)]
pub(crate) struct Mult<T> {
    current: Vec<AddressedValue<T>>,
    chunk: usize,
    end_sent: bool,
    arbiter: Arbiter,
    prev: PrevIterTable,
    pub cycles: ModuleCycles,
    pub stats: LayerStats,
}

impl<T: Scalar> Mult<T> {
    pub(crate) fn new() -> Self {
        Self {
            current: Vec::new(),
            chunk: 0,
            end_sent: false,
            arbiter: Arbiter::new(),
            prev: PrevIterTable::new(),
            cycles: ModuleCycles::default(),
            stats: LayerStats::default(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn tick(
        &mut self,
        t: u64,
        feed: &mut Feed<T>,
        out: &mut Channel<ProductGroup<T>>,
        weights: &Matrix<T>,
        params: &LayerParams,
        lat_mult: u64,
        lat_acc: u64,
    ) {
        if self.end_sent || !out.can_push() {
            return;
        }
        if self.current.is_empty() {
            let taken = match feed {
                Feed::Dense(ch) => ch.pop_ready(t).map(|p| {
                    p.values
                        .iter()
                        .enumerate()
                        .map(|(i, &value)| AddressedValue { value, row: p.row_base + i, col: p.col })
                        .collect::<Vec<_>>()
                }),
                Feed::Sparse(chs) => {
                    match self.arbiter.dispatch(chs, &mut self.prev, t, params.df, lat_acc) {
                        Dispatch::Issue(v) => Some(v),
                        Dispatch::Bubble => {
                            self.cycles.bubble += 1;
                            self.stats.mult_bubble += 1;
                            return;
                        }
                        Dispatch::Idle => None,
                    }
                }
            };
            match taken {
                Some(lanes) => {
                    self.stats.dispatches += 1;
                    self.stats.input_elements += lanes.len() as u64;
                    self.stats.input_nonzeros +=
                        lanes.iter().filter(|v| v.value != T::zero()).count() as u64;
                    self.current = lanes;
                    self.chunk = 0;
                }
                None => {
                    if feed.is_drained() {
                        out.push(ProductGroup::End, t + lat_mult);
                        self.end_sent = true;
                        self.stats.bank_conflicts = self.arbiter.bank_conflicts;
                    }
                    return;
                }
            }
        }

        let f_out = weights.cols();
        let lo = self.chunk * params.simd_ft;
        let hi = (lo + params.simd_ft).min(f_out);
        let lanes: Vec<(usize, Vec<T>)> = self
            .current
            .iter()
            .map(|v| (v.row, weights.row(v.col)[lo..hi].iter().map(|&w| v.value * w).collect()))
            .collect();
        self.stats.products += (lanes.len() * (hi - lo)) as u64;
        out.push(ProductGroup::Products { chunk: self.chunk, lanes }, t + lat_mult);
        self.cycles.active += 1;
        self.stats.mult_active += 1;
        self.chunk += 1;
        if self.chunk == params.ft_chunks(f_out) {
            self.current.clear();
        }
    }
}

/// Where an ACG module sends its post-activation rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Sink {
    /// Column-major packs for a dense next layer.
    Dense { df: usize, buffer_rows: usize },
    /// Evaluate `p` entries per cycle and forward the nonzeros to `p` FIFOs.
    Pruned { p: usize },
    /// Write to global memory at the given per-element cost.
    Memory { write_cost: u64 },
    /// Row-major node stream into the attention module, `width` features per cycle.
    NodeStream { width: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Transform,
    TransformDrain(u64),
    Aggregate,
    AggregateDrain(u64),
    Output,
    Done,
}

/// ACG module: accumulates the products into the features buffer, streams the
/// edges, applies bias and ReLU and emits the result.
#[derive(Debug)]
pub(crate) struct Acg<T> {
    phase: Phase,
    x: Matrix<T>,
    x_last: Vec<Option<u64>>,
    acc: Matrix<T>,
    acc_last: Vec<Option<u64>>,
    stream: Vec<StreamEntry<T>>,
    edge_ready: Vec<u64>,
    pos: usize,
    chunk: usize,
    out: Matrix<T>,
    out_pos: usize,
    out_progress: u64,
    sink: Sink,
    pub arrivals: Vec<u64>,
    pub finish: Option<u64>,
    pub raw_checks: u64,
    pub cycles: ModuleCycles,
    pub stats: LayerStats,
}

impl<T: Scalar> Acg<T> {
    pub(crate) fn new(
        rows: usize,
        buffer_rows: usize,
        f_out: usize,
        params: &LayerParams,
        stream: Vec<StreamEntry<T>>,
        edge_ready: Vec<u64>,
        sink: Sink,
    ) -> Self {
        let stats = LayerStats {
            buffer_rows: buffer_rows as u64,
            ..LayerStats::default()
        };
        Self {
            phase: Phase::Transform,
            x: Matrix::zeros(buffer_rows, f_out),
            x_last: vec![None; buffer_rows * params.ft_chunks(f_out)],
            acc: Matrix::zeros(rows, f_out),
            acc_last: vec![None; rows * params.agg_chunks(f_out)],
            stream,
            edge_ready,
            pos: 0,
            chunk: 0,
            out: Matrix::zeros(0, 0),
            out_pos: 0,
            out_progress: 0,
            sink,
            arrivals: Vec::with_capacity(rows),
            finish: None,
            raw_checks: 0,
            cycles: ModuleCycles::default(),
            stats,
        }
    }

    /// Starts directly at aggregation with an already transformed buffer.
    pub(crate) fn with_transformed(mut self, x: Matrix<T>) -> Self {
        assert_eq!(x.shape(), self.x.shape());
        self.x = x;
        self.phase = Phase::Aggregate;
        self
    }

    pub(crate) fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    fn commit(
        last: &mut [Option<u64>],
        key: usize,
        row: usize,
        chunk: usize,
        t: u64,
        lat_acc: u64,
        buffer: &'static str,
    ) -> Result<()> {
        if let Some(prev) = last[key] {
            let gap = t - prev;
            if gap < lat_acc {
                return Err(Error::RawHazard {
                    buffer,
                    row,
                    chunk,
                    cycle: t,
                    gap,
                    latency: lat_acc,
                });
            }
        }
        last[key] = Some(t);
        Ok(())
    }

    pub(crate) fn tick(
        &mut self,
        t: u64,
        input: &mut Channel<ProductGroup<T>>,
        next: Option<&mut Feed<T>>,
        bias: &[T],
        params: &LayerParams,
        lat_acc: u64,
    ) -> Result<()> {
        loop {
            match self.phase {
                Phase::TransformDrain(until) if t >= until => self.phase = Phase::Aggregate,
                Phase::AggregateDrain(until) if t >= until => self.start_output(bias),
                Phase::Aggregate if self.pos == self.stream.len() => {
                    self.phase = Phase::AggregateDrain(t + lat_acc)
                }
                _ => break,
            }
        }
        match self.phase {
            Phase::Transform => self.transform(t, input, params, lat_acc),
            Phase::Aggregate => self.aggregate(t, params, lat_acc),
            Phase::Output => {
                self.emit(t, next);
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn transform(
        &mut self,
        t: u64,
        input: &mut Channel<ProductGroup<T>>,
        params: &LayerParams,
        lat_acc: u64,
    ) -> Result<()> {
        match input.pop_ready(t) {
            Some(ProductGroup::Products { chunk, lanes }) => {
                let chunks = params.ft_chunks(self.x.cols());
                let lo = chunk * params.simd_ft;
                for (row, prods) in lanes {
                    self.raw_checks += 1;
                    Self::commit(&mut self.x_last, row * chunks + chunk, row, chunk, t, lat_acc, "features")?;
                    for (x, p) in self.x.row_mut(row)[lo..].iter_mut().zip(prods) {
                        *x += p;
                    }
                }
                self.cycles.active += 1;
            }
            Some(ProductGroup::End) => self.phase = Phase::TransformDrain(t + lat_acc),
            None => {}
        }
        Ok(())
    }

    fn aggregate(&mut self, t: u64, params: &LayerParams, lat_acc: u64) -> Result<()> {
        if self.chunk == 0 && self.edge_ready[self.pos] > t {
            return Ok(());
        }
        let e = self.stream[self.pos];
        let chunks = params.agg_chunks(self.acc.cols());
        self.stats.agg_cycles += 1;
        if e.is_bubble() {
            self.cycles.bubble += 1;
        } else {
            let lo = self.chunk * params.simd_agg;
            let hi = (lo + params.simd_agg).min(self.acc.cols());
            self.raw_checks += 1;
            Self::commit(&mut self.acc_last, e.dst * chunks + self.chunk, e.dst, self.chunk, t, lat_acc, "aggregation")?;
            for c in lo..hi {
                let v = e.weight * self.x[(e.src, c)];
                self.acc[(e.dst, c)] += v;
            }
            self.cycles.active += 1;
        }
        self.chunk += 1;
        if self.chunk == chunks {
            self.chunk = 0;
            self.stats.edge_entries += 1;
            if e.is_bubble() {
                self.stats.edge_bubbles += 1;
            }
            self.pos += 1;
        }
        Ok(())
    }

    fn start_output(&mut self, bias: &[T]) {
        let mut out = self.acc.clone();
        for r in 0..out.rows() {
            for (v, &b) in out.row_mut(r).iter_mut().zip(bias) {
                *v = (*v + b).relu();
            }
        }
        self.out = out;
        self.phase = Phase::Output;
    }

    fn finish_output(&mut self, t: u64, next: Option<&mut Feed<T>>) {
        if let Some(feed) = next {
            feed.close();
        }
        self.phase = Phase::Done;
        self.finish = Some(t + 1);
    }

    fn emit(&mut self, t: u64, next: Option<&mut Feed<T>>) {
        let (rows, cols) = self.out.shape();
        match (self.sink, next) {
            (Sink::Dense { df, buffer_rows }, Some(Feed::Dense(ch))) => {
                let blocks = buffer_rows / df;
                if ch.can_push() {
                    let col = self.out_pos / blocks;
                    let base = (self.out_pos % blocks) * df;
                    let values = (base..base + df)
                        .map(|r| if r < rows { self.out[(r, col)] } else { T::zero() })
                        .collect();
                    ch.push(Pack { col, row_base: base, values }, t + 1);
                    self.out_pos += 1;
                    self.stats.forwarded += df as u64;
                    self.cycles.active += 1;
                    self.stats.out_cycles += 1;
                }
                if self.out_pos == blocks * cols {
                    ch.close();
                    self.finish_output(t, None);
                }
            }
            (Sink::Pruned { p }, Some(Feed::Sparse(chs))) => {
                let total = rows * cols;
                let group: Vec<(usize, AddressedValue<T>)> = (self.out_pos..(self.out_pos + p).min(total))
                    .enumerate()
                    .filter_map(|(lane, idx)| {
                        let (col, row) = (idx / rows, idx % rows);
                        let value = self.out[(row, col)];
                        (value != T::zero()).then_some((lane, AddressedValue { value, row, col }))
                    })
                    .collect();
                if group.iter().all(|(lane, _)| chs[*lane].can_push()) {
                    for (lane, v) in group {
                        chs[lane].push(v, t + 1);
                        self.stats.forwarded += 1;
                    }
                    self.out_pos += p;
                    self.cycles.active += 1;
                    self.stats.out_cycles += 1;
                }
                if self.out_pos >= total {
                    chs.iter_mut().for_each(Channel::close);
                    self.finish_output(t, None);
                }
            }
            (Sink::Memory { write_cost }, _) => {
                let total = (rows * cols) as u64 * write_cost;
                if self.out_progress < total {
                    self.out_progress += 1;
                    self.cycles.active += 1;
                    self.stats.out_cycles += 1;
                }
                if self.out_progress >= total {
                    self.stats.forwarded = (rows * cols) as u64;
                    self.finish_output(t, None);
                }
            }
            (Sink::NodeStream { width }, _) => {
                let per_node = cols.div_ceil(width).max(1) as u64;
                self.out_progress += 1;
                self.cycles.active += 1;
                self.stats.out_cycles += 1;
                if self.out_progress == per_node {
                    self.out_progress = 0;
                    self.arrivals.push(t + 1);
                    self.out_pos += 1;
                    self.stats.forwarded += cols as u64;
                }
                if self.out_pos == rows {
                    self.finish_output(t, None);
                }
            }
            (sink, _) => unreachable!("sink {sink:?} without a matching feed"),
        }
    }
}

/// One GCN layer mapped onto a MULT/ACG pair.
#[derive(Debug)]
pub(crate) struct LayerUnit<'a, T> {
    pub layer: usize,
    pub params: LayerParams,
    pub weights: &'a Affine<T>,
    pub mult: Mult<T>,
    pub link: Channel<ProductGroup<T>>,
    pub acg: Acg<T>,
    pub mult_name: String,
    pub acg_name: String,
}

impl<'a, T: Scalar> LayerUnit<'a, T> {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        layer: usize,
        params: LayerParams,
        weights: &'a Affine<T>,
        rows: usize,
        buffer_rows: usize,
        stream: Vec<StreamEntry<T>>,
        edge_ready: Vec<u64>,
        sink: Sink,
        depth: usize,
        shared_names: bool,
    ) -> Self {
        let suffix = if shared_names { String::new() } else { (layer + 1).to_string() };
        let acg = Acg::new(rows, buffer_rows, weights.f_out(), &params, stream, edge_ready, sink);
        Self {
            layer,
            params,
            weights,
            mult: Mult::new(),
            link: Channel::new(depth),
            acg,
            mult_name: format!("mult{suffix}"),
            acg_name: format!("acg{suffix}"),
        }
    }

    fn work_estimate(&self) -> u64 {
        let f_out = self.weights.f_out();
        let ft = (self.acg.x.rows() * self.weights.f_in() * self.params.ft_chunks(f_out)) as u64;
        let agg = (self.acg.stream.len() * self.params.agg_chunks(f_out)) as u64;
        let out = (self.acg.acc.rows() * f_out) as u64;
        ft + agg + out
    }
}

/// Result of running a chain of layer units to completion.
#[derive(Debug)]
pub(crate) struct ChainOutcome<T> {
    pub end: u64,
    pub output: Matrix<T>,
    pub arrivals: Vec<u64>,
}

/// Steps `units` (fed by `source` into `feeds[0]`, unit `l` writing
/// `feeds[l + 1]`) one cycle at a time from `start` until the last unit has
/// emitted everything, then folds all counters into `report`.
pub(crate) fn run_chain<T: Scalar>(
    mut units: Vec<LayerUnit<'_, T>>,
    mut feeds: Vec<Feed<T>>,
    mut source: Source<T>,
    start: u64,
    cfg: &ArchConfig,
    report: &mut CycleReport,
) -> Result<ChainOutcome<T>> {
    assert_eq!(feeds.len(), units.len());
    let n = units.len();
    let write_cost = cfg.mem_write_cycles_per_element.max(1);
    let budget = units.iter().map(LayerUnit::work_estimate).sum::<u64>() * write_cost
        + source.work()
        + 64 * (cfg.lat_mult + cfg.lat_acc + 1);
    let limit = start + 8 * budget + 10_000;
    let mut reader = ModuleCycles::default();

    let mut t = start;
    while !units[n - 1].acg.is_done() {
        if t > limit {
            return Err(Error::Deadlock {
                context: format!("GCN layer chain starting at cycle {start}"),
                limit: limit - start,
            });
        }
        for l in (0..n).rev() {
            let (lo, hi) = feeds.split_at_mut(l + 1);
            let u = &mut units[l];
            u.acg.tick(t, &mut u.link, hi.first_mut(), &u.weights.bias, &u.params, cfg.lat_acc)?;
            u.mult.tick(t, &mut lo[l], &mut u.link, &u.weights.weight, &u.params, cfg.lat_mult, cfg.lat_acc);
        }
        if source.tick(t, &mut feeds[0]) {
            reader.active += 1;
        }
        t += 1;
    }

    report.add_module("reader", &reader);
    for (u, feed) in units.iter().zip(&feeds) {
        report.add_module(&u.mult_name, &u.mult.cycles);
        report.add_module(&u.acg_name, &u.acg.cycles);
        report.note_fifo(&format!("l{}.link", u.layer + 1), u.link.max_occupancy());
        feed.note_occupancy(u.layer, report);
        report.raw_checks += u.acg.raw_checks;
        let mut stats = u.mult.stats;
        stats.absorb(&u.acg.stats);
        report.layers[u.layer].absorb(&stats);
        report.dispatch_conflicts += u.mult.stats.bank_conflicts;
    }
    let last = units.pop().expect("non-empty chain");
    Ok(ChainOutcome {
        end: last.acg.finish.expect("finished"),
        output: last.acg.out,
        arrivals: last.acg.arrivals,
    })
}

/// Node embeddings of one graph plus its timing.
#[derive(Debug, Clone)]
pub(crate) struct GraphRun<T> {
    pub span: Span,
    pub embeddings: Matrix<T>,
    /// Cycle at which each node's final embedding reached the attention module.
    pub arrivals: Vec<u64>,
}

fn edge_ready(len: usize, start: u64, read_cost: u64) -> Vec<u64> {
    (0..len as u64).map(|i| start + (i + 1) * read_cost).collect()
}

/// Runs the three GCN layers of `g` starting at cycle `start`.
pub(crate) fn run_graph<T: Scalar>(
    g: &Graph,
    model: &SimGnnModel<T>,
    cfg: &ArchConfig,
    start: u64,
    report: &mut CycleReport,
) -> Result<GraphRun<T>> {
    let rows = g.num_nodes();
    let h0 = one_hot_features::<T>(g, model.input_features())?;
    let norm = normalize_adjacency::<T>(g);
    let stream = reorder_edges(&norm, cfg.lat_acc as usize).entries;
    let depth = cfg.fifo_depth;
    let read_cost = cfg.mem_read_cycles_per_element;
    let dense_rows = |l: usize| {
        let p = &cfg.layers[l];
        padded_row_count(rows, p.df, p.simd_ft, model.gcn[l].f_out(), cfg.lat_acc as usize)
    };
    let out_width = cfg.layers[2].simd_agg;

    let outcome = match cfg.mode {
        Mode::Baseline => {
            let mut t = start;
            let mut h = h0;
            let mut last = None;
            for l in 0..3 {
                let params = cfg.layers[l];
                let buffer_rows = dense_rows(l);
                let padded = h.with_zero_rows(buffer_rows - rows);
                let source = Source::dense(&padded, rows, params.df, read_cost);
                let sink = if l < 2 {
                    Sink::Memory { write_cost: cfg.mem_write_cycles_per_element }
                } else {
                    Sink::NodeStream { width: out_width }
                };
                let unit = LayerUnit::new(
                    l,
                    params,
                    &model.gcn[l],
                    rows,
                    buffer_rows,
                    stream.clone(),
                    edge_ready(stream.len(), t, read_cost),
                    sink,
                    depth,
                    true,
                );
                let o = run_chain(vec![unit], vec![Feed::dense(depth)], source, t, cfg, report)?;
                t = o.end;
                h = o.output.clone();
                last = Some(o);
            }
            last.expect("three layers")
        }
        Mode::InterLayerPipeline | Mode::ExtendedSparsity => {
            let sparse = cfg.mode.is_sparse();
            let ready = edge_ready(stream.len(), start, read_cost);
            let mut units = Vec::with_capacity(3);
            let mut feeds = Vec::with_capacity(3);
            for l in 0..3 {
                let params = cfg.layers[l];
                let buffer_rows = if sparse { rows } else { dense_rows(l) };
                let sink = if l == 2 {
                    Sink::NodeStream { width: out_width }
                } else if sparse {
                    Sink::Pruned { p: cfg.layers[l + 1].p.expect("validated") }
                } else {
                    Sink::Dense { df: cfg.layers[l + 1].df, buffer_rows: dense_rows(l + 1) }
                };
                units.push(LayerUnit::new(
                    l,
                    params,
                    &model.gcn[l],
                    rows,
                    buffer_rows,
                    stream.clone(),
                    ready.clone(),
                    sink,
                    depth,
                    false,
                ));
                feeds.push(if sparse {
                    Feed::sparse(params.p.expect("validated"), depth)
                } else {
                    Feed::dense(depth)
                });
            }
            let source = if sparse {
                Source::sparse(prune_pack(&h0), read_cost)
            } else {
                let padded = h0.with_zero_rows(dense_rows(0) - rows);
                Source::dense(&padded, rows, cfg.layers[0].df, read_cost)
            };
            run_chain(units, feeds, source, start, cfg, report)?
        }
    };
    Ok(GraphRun {
        span: Span { start, end: outcome.end },
        embeddings: outcome.output,
        arrivals: outcome.arrivals,
    })
}

/// Timing and output of [`simulate_ft_mult`].
#[derive(Debug, Clone, PartialEq)]
pub struct FtResult<T> {
    /// `H * W` accumulated from the emitted products.
    pub transformed: Matrix<T>,
    pub issue_cycles: u64,
    pub bubble_cycles: u64,
    pub products: u64,
    pub dispatches: u64,
    pub bank_conflicts: u64,
}

/// Input of a standalone MULT run.
#[derive(Debug, Clone, PartialEq)]
pub enum FtInput<'a, T> {
    /// Column-major packs of `df` rows; the row count must be a multiple of `df`.
    Dense(&'a FeatureMatrix<T>),
    /// Pruned elements spread round-robin over `p` FIFOs behind the arbiter.
    Pruned { values: &'a [AddressedValue<T>], rows: usize, p: usize },
}

/// Runs one MULT module in isolation on preloaded input and collects its
/// products.
pub fn simulate_ft_mult<T: Scalar>(
    input: FtInput<'_, T>,
    weights: &Affine<T>,
    params: &LayerParams,
    lat_mult: u64,
    lat_acc: u64,
) -> Result<FtResult<T>> {
    let (mut feed, rows) = match input {
        FtInput::Dense(h) => {
            if h.cols() != weights.f_in() {
                return Err(Error::dims("MULT input width", weights.f_in(), h.cols()));
            }
            if h.rows() % params.df != 0 {
                return Err(Error::dims("MULT dense rows (multiple of df)", h.rows().next_multiple_of(params.df), h.rows()));
            }
            let n = (h.rows() / params.df * h.cols()).max(1);
            let mut ch = Channel::new(n);
            if let Source::Dense { items, .. } = Source::dense(h, h.rows(), params.df, 0) {
                for (pack, _) in items {
                    ch.push(pack, 0);
                }
            }
            ch.close();
            (Feed::Dense(ch), h.rows())
        }
        FtInput::Pruned { values, rows, p } => {
            let mut chs: Vec<Channel<AddressedValue<T>>> =
                (0..p.max(1)).map(|_| Channel::new(values.len().max(1))).collect();
            for (i, v) in values.iter().enumerate() {
                if v.col >= weights.f_in() || v.row >= rows {
                    return Err(Error::dims("MULT element coordinate", weights.f_in(), v.col));
                }
                let lanes = chs.len();
                chs[i % lanes].push(*v, 0);
            }
            chs.iter_mut().for_each(Channel::close);
            (Feed::Sparse(chs), rows)
        }
    };
    let mut mult = Mult::new();
    let mut link: Channel<ProductGroup<T>> = Channel::new(lat_mult as usize + 1);
    let mut x = Matrix::zeros(rows, weights.f_out());
    let mut t = 0;
    loop {
        match link.pop_ready(t) {
            Some(ProductGroup::End) => break,
            Some(ProductGroup::Products { chunk, lanes }) => {
                let lo = chunk * params.simd_ft;
                for (row, prods) in lanes {
                    for (v, p) in x.row_mut(row)[lo..].iter_mut().zip(prods) {
                        *v += p;
                    }
                }
            }
            None => {}
        }
        mult.tick(t, &mut feed, &mut link, &weights.weight, params, lat_mult, lat_acc);
        t += 1;
    }
    Ok(FtResult {
        transformed: x,
        issue_cycles: mult.cycles.active,
        bubble_cycles: mult.cycles.bubble,
        products: mult.stats.products,
        dispatches: mult.stats.dispatches,
        bank_conflicts: mult.stats.bank_conflicts,
    })
}

/// Timing and output of [`simulate_acg`].
#[derive(Debug, Clone, PartialEq)]
pub struct AcgResult<T> {
    /// Post-activation features.
    pub output: Matrix<T>,
    /// Nonzeros forwarded to each of the `p` output FIFOs, in order.
    pub forwarded: Vec<Vec<AddressedValue<T>>>,
    pub aggregation_cycles: u64,
    pub edge_bubble_cycles: u64,
    pub output_cycles: u64,
    pub total_cycles: u64,
}

/// Runs aggregation, activation and pruning of one ACG module starting from
/// an already transformed features buffer `x` (`|V| x f_out`).
pub fn simulate_acg<T: Scalar>(
    x: &Matrix<T>,
    bias: &[T],
    stream: &[StreamEntry<T>],
    params: &LayerParams,
    lat_acc: u64,
    p_out: usize,
) -> Result<AcgResult<T>> {
    if bias.len() != x.cols() {
        return Err(Error::dims("ACG bias width", x.cols(), bias.len()));
    }
    if let Some(e) = stream.iter().find(|e| !e.is_bubble() && (e.src >= x.rows() || e.dst >= x.rows())) {
        return Err(Error::InvalidGraph(format!("edge {}->{} outside {} rows", e.src, e.dst, x.rows())));
    }
    let p_out = p_out.max(1);
    let rows = x.rows();
    let mut acg = Acg::new(
        rows,
        rows,
        x.cols(),
        params,
        stream.to_vec(),
        vec![0; stream.len()],
        Sink::Pruned { p: p_out },
    )
    .with_transformed(x.clone());
    let cap = (rows * x.cols()).max(1);
    let mut feed = Feed::<T>::Sparse((0..p_out).map(|_| Channel::new(cap)).collect());
    let mut link = Channel::new(1);
    let mut t = 0;
    let limit = 16 * (stream.len() * params.agg_chunks(x.cols()) + cap) as u64 + 64 * lat_acc + 64;
    while !acg.is_done() {
        if t > limit {
            return Err(Error::Deadlock { context: "standalone ACG".into(), limit });
        }
        acg.tick(t, &mut link, Some(&mut feed), bias, params, lat_acc)?;
        t += 1;
    }
    let Feed::Sparse(chs) = feed else { unreachable!() };
    let forwarded = chs
        .into_iter()
        .map(|mut c| std::iter::from_fn(|| c.pop_ready(u64::MAX)).collect())
        .collect();
    Ok(AcgResult {
        output: acg.out,
        forwarded,
        aggregation_cycles: acg.stats.agg_cycles,
        edge_bubble_cycles: acg.cycles.bubble,
        output_cycles: acg.stats.out_cycles,
        total_cycles: t,
    })
}
