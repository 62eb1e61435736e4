//! Bounded FIFO channel between simulated modules.

use std::collections::VecDeque;

/// Bounded FIFO whose items become visible to the consumer at a given cycle.
///
/// Writers must check [`Channel::can_push`] first (non-blocking write); readers
/// only ever see items whose ready cycle has passed.
#[derive(Debug, Clone)]
pub struct Channel<I> {
    capacity: usize,
    queue: VecDeque<(u64, I)>,
    closed: bool,
    max_occupancy: usize,
    pushed: u64,
}

impl<I> Channel<I> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "channel capacity must be at least 1");
        Self {
            capacity,
            queue: VecDeque::with_capacity(capacity),
            closed: false,
            max_occupancy: 0,
            pushed: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn can_push(&self) -> bool {
        self.queue.len() < self.capacity
    }

    /// # Panics
    /// When full or already closed; callers check [`Channel::can_push`].
    pub fn push(&mut self, item: I, ready_at: u64) {
        assert!(self.can_push(), "push into a full channel");
        assert!(!self.closed, "push into a closed channel");
        self.queue.push_back((ready_at, item));
        self.pushed += 1;
        self.max_occupancy = self.max_occupancy.max(self.queue.len());
    }

    pub fn peek_ready(&self, now: u64) -> Option<&I> {
        match self.queue.front() {
            Some((ready, item)) if *ready <= now => Some(item),
            _ => None,
        }
    }

    pub fn pop_ready(&mut self, now: u64) -> Option<I> {
        if self.peek_ready(now).is_some() {
            self.queue.pop_front().map(|(_, item)| item)
        } else {
            None
        }
    }

    /// Marks end of stream; already-queued items stay readable.
    pub fn close(&mut self) {
        self.closed = true;
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Closed and empty: the producer is done and everything was consumed.
    pub fn is_drained(&self) -> bool {
        self.closed && self.queue.is_empty()
    }

    pub fn max_occupancy(&self) -> usize {
        self.max_occupancy
    }

    pub fn total_pushed(&self) -> u64 {
        self.pushed
    }
}
