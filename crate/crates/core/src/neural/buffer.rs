use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// Fixed-capacity ring of transitions; the oldest entry is overwritten once
/// full.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("replay buffer capacity must be positive"));
        }
        Ok(ReplayBuffer {
            capacity,
            storage: Vec::with_capacity(capacity.min(1 << 16)),
            cursor: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn push(&mut self, tr: Transition) {
        if self.storage.len() < self.capacity {
            self.storage.push(tr);
        } else {
            self.storage[self.cursor] = tr;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.storage.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.storage.iter()
    }

    /// `n` slot indices drawn uniformly with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.storage.is_empty() {
            return Err(Error::invalid("cannot sample from an empty replay buffer"));
        }
        Ok((0..n).map(|_| rng.gen_range(0..self.storage.len())).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<&Transition>> {
        Ok(self
            .sample_indices(n, rng)?
            .into_iter()
            .map(|i| &self.storage[i])
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::SmrRng;
    use rand::SeedableRng;

    fn tr(i: usize) -> Transition {
        Transition {
            state: vec![i as f64],
            action: vec![0.0],
            reward: i as f64,
            next_state: vec![i as f64 + 1.0],
            done: false,
        }
    }

    #[test]
    fn overwrites_oldest_beyond_capacity() {
        let (cap, k) = (5, 3);
        let mut buf = ReplayBuffer::new(cap).unwrap();
        for i in 0..cap + k {
            buf.push(tr(i));
        }
        assert_eq!(buf.len(), cap);
        let rewards: Vec<usize> = buf.iter().map(|t| t.reward as usize).collect();
        for old in 0..k {
            assert!(!rewards.contains(&old));
        }
        for new in k..cap + k {
            assert!(rewards.contains(&new));
        }
    }

    #[test]
    fn samples_only_stored_entries() {
        let mut buf = ReplayBuffer::new(100).unwrap();
        let mut rng = SmrRng::seed_from_u64(1);
        assert!(buf.sample(1, &mut rng).is_err());
        for i in 0..7 {
            buf.push(tr(i));
        }
        let idx = buf.sample_indices(1000, &mut rng).unwrap();
        assert!(idx.iter().all(|&i| i < 7));
        assert!((0..7).all(|i| idx.contains(&i)));
    }

    #[test]
    fn zero_capacity_rejected() {
        assert!(ReplayBuffer::new(0).is_err());
    }
}
