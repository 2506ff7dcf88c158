use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::topology::EdgeId;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pending<T> {
    time: T,
    edge: EdgeId,
}

impl<T: Scalar> Eq for Pending<T> {}

impl<T: Scalar> PartialOrd for Pending<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Pending<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // event times are finite sums of positive durations, never NaN
        self.time
            .partial_cmp(&other.time)
            .expect("event times are comparable")
            .then(self.edge.cmp(&other.edge))
    }
}

/// Min-heap of per-edge clock expiries. Each edge has at most one entry.
#[derive(Debug, Clone)]
pub(crate) struct Calendar<T> {
    heap: BinaryHeap<Reverse<Pending<T>>>,
}

impl<T: Scalar> Calendar<T> {
    pub fn new() -> Self {
        Calendar { heap: BinaryHeap::new() }
    }

    pub fn schedule(&mut self, edge: EdgeId, time: T) {
        self.heap.push(Reverse(Pending { time, edge }));
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn next_time(&self) -> Option<T> {
        self.heap.peek().map(|p| p.0.time)
    }

    /// Removes every entry due at exactly the earliest time, in edge order.
    pub fn pop_batch(&mut self, into: &mut Vec<EdgeId>) -> Option<T> {
        let t = self.next_time()?;
        while let Some(Reverse(p)) = self.heap.peek() {
            if p.time != t {
                break;
            }
            into.push(p.edge);
            self.heap.pop();
        }
        Some(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batches_simultaneous_expiries() {
        let mut c = Calendar::new();
        c.schedule(2, 0.5);
        c.schedule(0, 0.25);
        c.schedule(1, 0.5);
        c.schedule(3, 0.75);
        let mut batch = Vec::new();
        assert_eq!(c.pop_batch(&mut batch), Some(0.25));
        assert_eq!(batch, vec![0]);
        batch.clear();
        assert_eq!(c.pop_batch(&mut batch), Some(0.5));
        assert_eq!(batch, vec![1, 2]);
        assert_eq!(c.len(), 1);
    }
}
