//! Enumeration: order-preserving replacement of timestamps.
//!
//! Records are buffered in a bounded window and released smallest-timestamp
//! first with synthetic times: the first release takes the starting value,
//! every later release repeats the previous synthetic value when its
//! original timestamp equals the previous original, and is exactly one
//! second later otherwise. Only events inside the window can be reordered;
//! larger windows absorb more disorder at the cost of memory.

use crate::error::EngineError;
use std::collections::BinaryHeap;

struct Pending<T> {
    ts: u64,
    seq: u64,
    payload: T,
}

// Min-heap ordering by (ts, arrival), ignoring the payload.
impl<T> Ord for Pending<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (other.ts, other.seq).cmp(&(self.ts, self.seq))
    }
}
impl<T> PartialOrd for Pending<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> PartialEq for Pending<T> {
    fn eq(&self, other: &Self) -> bool {
        (self.ts, self.seq) == (other.ts, other.seq)
    }
}
impl<T> Eq for Pending<T> {}

/// One emission: the original timestamp, its synthetic replacement and the
/// buffered payload.
#[derive(Debug, PartialEq, Eq)]
pub struct Emitted<T> {
    pub original: u64,
    pub synthetic: u64,
    pub payload: T,
}

/// The sliding sort window.
pub struct EnumWindow<T> {
    heap: BinaryHeap<Pending<T>>,
    capacity: usize,
    start: u64,
    next_seq: u64,
    last: Option<(u64, u64)>,
}

impl<T> EnumWindow<T> {
    /// `capacity` is the number of records the window may hold; `start` is
    /// the synthetic timestamp of the first emission.
    pub fn new(capacity: usize, start: u64) -> Result<EnumWindow<T>, EngineError> {
        if capacity == 0 {
            return Err(EngineError::ZeroWindowCapacity);
        }
        Ok(EnumWindow {
            heap: BinaryHeap::with_capacity(capacity + 1),
            capacity,
            start,
            next_seq: 0,
            last: None,
        })
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Buffer one record; emits the minimum-timestamp record whenever the
    /// buffer would exceed its capacity.
    pub fn push(&mut self, ts: u64, payload: T) -> Vec<Emitted<T>> {
        self.heap.push(Pending {
            ts,
            seq: self.next_seq,
            payload,
        });
        self.next_seq += 1;
        let mut out = Vec::new();
        while self.heap.len() > self.capacity {
            out.push(self.emit_min());
        }
        out
    }

    /// Drain the window at end of input, in timestamp order, under the same
    /// synthetic-assignment rule.
    pub fn flush(&mut self) -> Vec<Emitted<T>> {
        let mut out = Vec::with_capacity(self.heap.len());
        while !self.heap.is_empty() {
            out.push(self.emit_min());
        }
        out
    }

    fn emit_min(&mut self) -> Emitted<T> {
        let pending = self.heap.pop().expect("emit_min on empty window");
        let synthetic = match self.last {
            Some((orig, synth)) if orig == pending.ts => synth,
            Some((_, synth)) => synth + 1,
            None => self.start,
        };
        self.last = Some((pending.ts, synthetic));
        Emitted {
            original: pending.ts,
            synthetic,
            payload: pending.payload,
        }
    }
}
