//! Virtual clock for deterministic simulation of parallel workers.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockMode {
    /// Single-threaded discrete-event simulation; evaluations take `cost` virtual seconds.
    #[default]
    Simulated,
    /// Real worker threads; each evaluation sleeps for `cost * time_scale` seconds.
    Realtime,
}

#[derive(Debug)]
struct Scheduled<T> {
    time: f64,
    worker: usize,
    payload: T,
}

impl<T> PartialEq for Scheduled<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T> Eq for Scheduled<T> {}

impl<T> PartialOrd for Scheduled<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Scheduled<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.worker.cmp(&other.worker))
    }
}

/// Completion events ordered by time, then worker index.
#[derive(Debug)]
pub struct SimClock<T> {
    now: f64,
    queue: BinaryHeap<Reverse<Scheduled<T>>>,
}

impl<T> Default for SimClock<T> {
    fn default() -> Self {
        Self {
            now: 0.0,
            queue: BinaryHeap::new(),
        }
    }
}

impl<T> SimClock<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn is_idle(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Schedules `payload` to complete on `worker` after `duration`.
    pub fn schedule(&mut self, worker: usize, duration: f64, payload: T) {
        let duration = if duration.is_finite() {
            duration.max(0.0)
        } else {
            0.0
        };
        self.queue.push(Reverse(Scheduled {
            time: self.now + duration,
            worker,
            payload,
        }));
    }

    /// Advances to the earliest pending event and returns every event due at
    /// that instant, in worker order.
    pub fn advance(&mut self) -> Vec<(usize, T)> {
        let Some(Reverse(first)) = self.queue.pop() else {
            return Vec::new();
        };
        self.now = self.now.max(first.time);
        let mut due = vec![(first.worker, first.payload)];
        while self
            .queue
            .peek()
            .is_some_and(|Reverse(next)| next.time <= self.now)
        {
            let Reverse(next) = self.queue.pop().unwrap();
            due.push((next.worker, next.payload));
        }
        due
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fires_in_time_then_worker_order() {
        let mut clock = SimClock::new();
        clock.schedule(2, 5.0, "c");
        clock.schedule(0, 3.0, "a");
        clock.schedule(1, 5.0, "b");
        assert_eq!(clock.advance(), vec![(0, "a")]);
        assert_eq!(clock.now(), 3.0);
        clock.schedule(0, 2.0, "d");
        assert_eq!(clock.advance(), vec![(0, "d"), (1, "b"), (2, "c")]);
        assert_eq!(clock.now(), 5.0);
        assert!(clock.advance().is_empty());
        assert_eq!(clock.now(), 5.0);
    }

    #[test]
    fn time_never_decreases() {
        let mut clock = SimClock::new();
        let mut last = 0.0;
        for (i, d) in [4.0, 1.0, 7.0, 0.0, 2.5].iter().enumerate() {
            clock.schedule(i, *d, ());
        }
        while !clock.is_idle() {
            clock.advance();
            assert!(clock.now() >= last);
            last = clock.now();
        }
    }
}
