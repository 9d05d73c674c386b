//! Ring replay buffer with uniform without-replacement sampling.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::RlError;

/// One stored interaction. States and actions are flat vectors; callers know
/// their shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// Fixed-capacity ring: pushing past capacity overwrites the oldest entry.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    data: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "capacity must be positive");
        Self {
            capacity,
            data: Vec::with_capacity(capacity),
            cursor: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) {
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Uniform sample of `n` distinct transitions.
    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<&Transition>, RlError> {
        if n > self.data.len() {
            return Err(RlError::BufferUnderfull {
                have: self.data.len(),
                need: n,
            });
        }
        // Partial Fisher-Yates over the index range.
        let mut indices: Vec<usize> = (0..self.data.len()).collect();
        for i in 0..n {
            let j = rng.random_range(i..indices.len());
            indices.swap(i, j);
        }
        Ok(indices[..n].iter().map(|&i| &self.data[i]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn t(v: f64) -> Transition {
        Transition {
            state: alloc::vec![v],
            action: alloc::vec![v],
            reward: v,
            next_state: alloc::vec![v],
            done: false,
        }
    }

    #[test]
    fn ring_evicts_oldest() {
        let mut b = ReplayBuffer::new(2);
        b.push(t(1.0));
        b.push(t(2.0));
        b.push(t(3.0));
        assert_eq!(b.len(), 2);
        let rewards: Vec<f64> = b.data.iter().map(|x| x.reward).collect();
        assert!(rewards.contains(&2.0) && rewards.contains(&3.0));
        assert!(!rewards.contains(&1.0), "first item evicted");
    }

    #[test]
    fn full_sample_is_a_permutation() {
        let mut b = ReplayBuffer::new(8);
        for i in 0..5 {
            b.push(t(i as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let batch = b.sample(5, &mut rng).unwrap();
        let mut rewards: Vec<f64> = batch.iter().map(|x| x.reward).collect();
        rewards.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(rewards, alloc::vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let mut b = ReplayBuffer::new(16);
        for i in 0..10 {
            b.push(t(i as f64));
        }
        let a: Vec<f64> = b
            .sample(4, &mut ChaCha8Rng::seed_from_u64(7))
            .unwrap()
            .iter()
            .map(|x| x.reward)
            .collect();
        let c: Vec<f64> = b
            .sample(4, &mut ChaCha8Rng::seed_from_u64(7))
            .unwrap()
            .iter()
            .map(|x| x.reward)
            .collect();
        assert_eq!(a, c);
    }

    #[test]
    fn underfull_buffer_refuses_to_sample() {
        let mut b = ReplayBuffer::new(8);
        b.push(t(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            b.sample(2, &mut rng),
            Err(RlError::BufferUnderfull { have: 1, need: 2 })
        ));
    }
}
