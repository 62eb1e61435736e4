//! Offline transformations applied before a query reaches the accelerator:
//! RAW-safe edge ordering, zero pruning with coordinates, and the dense
//! row-padding rule.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use crate::graph::{FeatureMatrix, NormalizedGraph, WeightedEdge};
use crate::scalar::Scalar;

/// Node index reserved for bubble entries.
pub const SENTINEL: usize = usize::MAX;

/// A nonzero feature tagged with its coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AddressedValue<T> {
    pub value: T,
    pub row: usize,
    pub col: usize,
}

/// One slot of an edge stream; `src == dst == SENTINEL` marks a bubble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamEntry<T> {
    pub src: usize,
    pub dst: usize,
    pub weight: T,
}

impl<T: Scalar> StreamEntry<T> {
    pub fn bubble() -> Self {
        Self {
            src: SENTINEL,
            dst: SENTINEL,
            weight: T::zero(),
        }
    }

    pub fn is_bubble(&self) -> bool {
        self.src == SENTINEL && self.dst == SENTINEL
    }
}

impl<T: Scalar> From<WeightedEdge<T>> for StreamEntry<T> {
    fn from(e: WeightedEdge<T>) -> Self {
        Self {
            src: e.src,
            dst: e.dst,
            weight: e.weight,
        }
    }
}

/// Ordered edges for the aggregation engine; entries sharing a destination
/// are at least `L` positions apart.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeStream<T> {
    pub entries: Vec<StreamEntry<T>>,
}

impl<T: Scalar> EdgeStream<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn bubbles(&self) -> usize {
        self.entries.iter().filter(|e| e.is_bubble()).count()
    }

    pub fn edges(&self) -> impl Iterator<Item = &StreamEntry<T>> {
        self.entries.iter().filter(|e| !e.is_bubble())
    }

    /// `pos,src,dst,weight` lines; bubbles print `B` for both endpoints.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pos,src,dst,weight\n");
        for (pos, e) in self.entries.iter().enumerate() {
            if e.is_bubble() {
                writeln!(out, "{pos},B,B,0").unwrap();
            } else {
                writeln!(out, "{pos},{},{},{}", e.src, e.dst, e.weight).unwrap();
            }
        }
        out
    }
}

/// Greedy most-constrained-destination-first ordering. At each position the
/// destination with the most remaining edges among those whose previous
/// placement is at least `l` positions back is emitted (ties go to the
/// smaller node id); when none qualifies a bubble is emitted.
pub fn reorder_edges<T: Scalar>(g: &NormalizedGraph<T>, l: usize) -> EdgeStream<T> {
    let l = l.max(1);
    let mut queues: BTreeMap<usize, VecDeque<WeightedEdge<T>>> = BTreeMap::new();
    for &e in g.edges() {
        queues.entry(e.dst).or_default().push_back(e);
    }
    let mut last: BTreeMap<usize, usize> = BTreeMap::new();
    let mut remaining = g.num_entries();
    let mut entries = Vec::with_capacity(remaining);

    while remaining > 0 {
        let pos = entries.len();
        let pick = queues
            .iter()
            .filter(|(dst, q)| {
                !q.is_empty() && last.get(dst).is_none_or(|&p| pos - p >= l)
            })
            .max_by(|(da, qa), (db, qb)| qa.len().cmp(&qb.len()).then(db.cmp(da)))
            .map(|(&dst, _)| dst);
        match pick {
            Some(dst) => {
                let e = queues.get_mut(&dst).and_then(VecDeque::pop_front).expect("non-empty");
                entries.push(e.into());
                last.insert(dst, pos);
                remaining -= 1;
            }
            None => entries.push(StreamEntry::bubble()),
        }
    }
    EdgeStream { entries }
}

/// Same edges in their original order with no spacing guarantee.
pub fn unordered_stream<T: Scalar>(g: &NormalizedGraph<T>) -> EdgeStream<T> {
    EdgeStream {
        entries: g.edges().iter().map(|&e| e.into()).collect(),
    }
}

/// True iff the stream's edges are exactly `g`'s edge multiset and every two
/// entries with the same destination are at least `l` positions apart.
pub fn verify_edge_stream<T: Scalar>(s: &EdgeStream<T>, g: &NormalizedGraph<T>, l: usize) -> bool {
    let key = |src: usize, dst: usize, w: T| (src, dst, w.as_f64().to_bits());
    let mut got: Vec<_> = s.edges().map(|e| key(e.src, e.dst, e.weight)).collect();
    let mut want: Vec<_> = g.edges().iter().map(|e| key(e.src, e.dst, e.weight)).collect();
    got.sort_unstable();
    want.sort_unstable();
    if got != want {
        return false;
    }
    let mut last: BTreeMap<usize, usize> = BTreeMap::new();
    for (pos, e) in s.entries.iter().enumerate() {
        if e.is_bubble() {
            continue;
        }
        if let Some(prev) = last.insert(e.dst, pos) {
            if pos - prev < l {
                return false;
            }
        }
    }
    true
}

/// Smallest row count `>= rows` that is a multiple of `df` and satisfies
/// `(rows / df) * ceil(f_out / simd) >= l`.
pub fn padded_row_count(rows: usize, df: usize, simd: usize, f_out: usize, l: usize) -> usize {
    let df = df.max(1);
    let groups = f_out.div_ceil(simd.max(1)).max(1);
    let blocks = rows.div_ceil(df).max(l.div_ceil(groups));
    blocks * df
}

/// Appends zero rows per [`padded_row_count`].
pub fn pad_rows<T: Scalar>(
    h: &FeatureMatrix<T>,
    df: usize,
    simd: usize,
    f_out: usize,
    l: usize,
) -> FeatureMatrix<T> {
    let target = padded_row_count(h.rows(), df, simd, f_out, l);
    h.with_zero_rows(target - h.rows())
}

/// Nonzero entries in column-major order.
pub fn prune_pack<T: Scalar>(h: &FeatureMatrix<T>) -> Vec<AddressedValue<T>> {
    let mut out = Vec::new();
    for col in 0..h.cols() {
        for row in 0..h.rows() {
            let value = h[(row, col)];
            if value != T::zero() {
                out.push(AddressedValue { value, row, col });
            }
        }
    }
    out
}
