//! Bounded experience replay memory.

use std::collections::VecDeque;

use rand::Rng;

use crate::env::SystemState;

/// One stored transition. `action` is a flat grid index that was feasible in
/// `state` when it was taken.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub state: SystemState,
    pub action: usize,
    pub reward: f64,
    pub next_state: SystemState,
}

/// FIFO ring of experiences with a uniform with-replacement sampler.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    buf: VecDeque<Experience>,
    capacity: usize,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "replay capacity must be at least 1");
        ReplayMemory {
            buf: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    /// Appends an experience, evicting the oldest one once full.
    pub fn push(&mut self, experience: Experience) {
        if self.buf.len() == self.capacity {
            self.buf.pop_front();
        }
        self.buf.push_back(experience);
    }

    /// Uniform sample of `n` experiences (with replacement), or `None` while
    /// the memory holds fewer than `n`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Option<Vec<&Experience>> {
        if self.buf.len() < n {
            return None;
        }
        Some(
            (0..n)
                .map(|_| &self.buf[rng.gen_range(0..self.buf.len())])
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    #[cfg(test)]
    pub(crate) fn oldest(&self) -> Option<&Experience> {
        self.buf.front()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SimRng;
    use rand::SeedableRng;

    fn exp(tag: usize) -> Experience {
        Experience {
            state: SystemState::uniform(1, 0, 0),
            action: tag,
            reward: 0.0,
            next_state: SystemState::uniform(1, 0, 0),
        }
    }

    #[test]
    fn oldest_experience_evicted_first() {
        let mut mem = ReplayMemory::new(3);
        for tag in 0..5 {
            mem.push(exp(tag));
            assert!(mem.len() <= 3);
        }
        assert_eq!(mem.len(), 3);
        assert_eq!(mem.oldest().unwrap().action, 2);
    }

    #[test]
    fn sampling_requires_enough_entries() {
        let mut mem = ReplayMemory::new(10);
        let mut rng = SimRng::seed_from_u64(0);
        mem.push(exp(0));
        assert!(mem.sample(2, &mut rng).is_none());
        mem.push(exp(1));
        let batch = mem.sample(2, &mut rng).unwrap();
        assert_eq!(batch.len(), 2);
    }

    #[test]
    fn sample_draws_across_the_whole_buffer() {
        let mut mem = ReplayMemory::new(100);
        for tag in 0..100 {
            mem.push(exp(tag));
        }
        let mut rng = SimRng::seed_from_u64(1);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..50 {
            for e in mem.sample(32, &mut rng).unwrap() {
                seen.insert(e.action);
            }
        }
        assert!(seen.len() > 90, "only {} distinct entries sampled", seen.len());
    }
}
