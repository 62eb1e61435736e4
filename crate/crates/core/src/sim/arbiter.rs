//! Round-robin dispatch from the pruned-input FIFOs into the MULT PEs.

use std::collections::HashMap;

use crate::preproc::AddressedValue;
use crate::sim::fifo::Channel;

/// Last dispatch cycle of every output row seen so far.
#[derive(Debug, Clone, Default)]
pub struct PrevIterTable {
    last: HashMap<usize, u64>,
}

impl PrevIterTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, row: usize) -> Option<u64> {
        self.last.get(&row).copied()
    }

    /// # Panics
    /// If `cycle` is earlier than the recorded entry.
    pub fn record(&mut self, row: usize, cycle: u64) {
        let e = self.last.entry(row).or_insert(cycle);
        assert!(*e <= cycle, "dispatch table must be nondecreasing");
        *e = cycle;
    }

    /// True when `row` was dispatched less than `window` cycles before `cycle`.
    pub fn in_window(&self, row: usize, cycle: u64, window: u64) -> bool {
        self.get(row).is_some_and(|p| cycle - p < window)
    }
}

/// Outcome of one arbitration cycle.
#[derive(Debug, Clone, PartialEq)]
pub enum Dispatch<T> {
    /// Elements handed to the PEs, each from a different FIFO and bank.
    Issue(Vec<AddressedValue<T>>),
    /// Candidates exist but one of them is still inside its RAW window.
    Bubble,
    /// Nothing to dispatch.
    Idle,
}

/// Round-robin arbiter state.
#[derive(Debug, Clone, Default)]
pub struct Arbiter {
    head: usize,
    pub bank_conflicts: u64,
}

impl Arbiter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn head(&self) -> usize {
        self.head
    }

    /// Picks up to `df` elements from distinct FIFOs with distinct banks
    /// (`row % df`), scanning from the head pointer. If any picked row is
    /// still inside the `lat_acc` window nothing is popped and a bubble is
    /// reported. On issue the picked rows are stamped with `cycle` and the
    /// head moves past the first FIFO served.
    pub fn dispatch<T: Copy>(
        &mut self,
        fifos: &mut [Channel<AddressedValue<T>>],
        prev: &mut PrevIterTable,
        cycle: u64,
        df: usize,
        lat_acc: u64,
    ) -> Dispatch<T> {
        let p = fifos.len();
        if p == 0 {
            return Dispatch::Idle;
        }
        let df = df.max(1);
        let mut picked: Vec<usize> = Vec::with_capacity(df);
        let mut banks: Vec<usize> = Vec::with_capacity(df);
        let mut conflicts = 0u64;
        for k in 0..p {
            let i = (self.head + k) % p;
            let Some(v) = fifos[i].peek_ready(cycle) else {
                continue;
            };
            let bank = v.row % df;
            if banks.contains(&bank) {
                conflicts += 1;
                continue;
            }
            picked.push(i);
            banks.push(bank);
            if picked.len() == df {
                break;
            }
        }
        if picked.is_empty() {
            return Dispatch::Idle;
        }
        let hazard = picked.iter().any(|&i| {
            let row = fifos[i].peek_ready(cycle).expect("peeked").row;
            prev.in_window(row, cycle, lat_acc)
        });
        if hazard {
            return Dispatch::Bubble;
        }
        self.bank_conflicts += conflicts;
        self.head = (picked[0] + 1) % p;
        let issued = picked
            .iter()
            .map(|&i| {
                let v = fifos[i].pop_ready(cycle).expect("peeked");
                prev.record(v.row, cycle);
                v
            })
            .collect();
        Dispatch::Issue(issued)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn av(row: usize) -> AddressedValue<f32> {
        AddressedValue { value: 1.0, row, col: 0 }
    }

    fn fifos(contents: &[&[usize]]) -> Vec<Channel<AddressedValue<f32>>> {
        contents
            .iter()
            .map(|rows| {
                let mut c = Channel::new(16);
                for &r in *rows {
                    c.push(av(r), 0);
                }
                c
            })
            .collect()
    }

    #[test]
    fn empty_fifos_idle() {
        let mut f = fifos(&[&[], &[]]);
        let mut prev = PrevIterTable::new();
        let mut a = Arbiter::new();
        assert_eq!(a.dispatch(&mut f, &mut prev, 0, 2, 7), Dispatch::Idle);
        assert_eq!(prev.get(0), None);
    }

    #[test]
    fn bank_conflict_defers_second_element() {
        let mut f = fifos(&[&[0], &[2]]);
        let mut prev = PrevIterTable::new();
        let mut a = Arbiter::new();
        match a.dispatch(&mut f, &mut prev, 0, 2, 7) {
            Dispatch::Issue(v) => assert_eq!(v.iter().map(|x| x.row).collect::<Vec<_>>(), vec![0]),
            d => panic!("{d:?}"),
        }
        assert_eq!(a.bank_conflicts, 1);
        match a.dispatch(&mut f, &mut prev, 1, 2, 7) {
            Dispatch::Issue(v) => assert_eq!(v[0].row, 2),
            d => panic!("{d:?}"),
        }
    }

    #[test]
    fn same_row_waits_out_the_window() {
        let mut f = fifos(&[&[5, 5]]);
        let mut prev = PrevIterTable::new();
        let mut a = Arbiter::new();
        let mut issued = vec![];
        let mut bubbles = 0;
        for cycle in 0..20 {
            match a.dispatch(&mut f, &mut prev, cycle, 1, 7) {
                Dispatch::Issue(_) => issued.push(cycle),
                Dispatch::Bubble => bubbles += 1,
                Dispatch::Idle => {}
            }
        }
        assert_eq!(issued, vec![0, 7]);
        assert_eq!(bubbles, 6);
    }

    #[test]
    fn head_advances_past_first_served() {
        let mut f = fifos(&[&[0], &[1], &[2]]);
        let mut prev = PrevIterTable::new();
        let mut a = Arbiter::new();
        a.dispatch(&mut f, &mut prev, 0, 1, 1);
        assert_eq!(a.head(), 1);
        a.dispatch(&mut f, &mut prev, 1, 1, 1);
        assert_eq!(a.head(), 2);
    }
}
