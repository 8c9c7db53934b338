//! Deterministic random streams.
//!
//! Every Monte Carlo replication draws from its own stream derived as
//! `derive(master_seed, replication_index)`, so results never depend on
//! the order in which replications are scheduled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// A seeded, owned source of Gaussian and uniform draws.
pub struct RandomStream {
    rng: ChaCha12Rng,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// A sub-seed for nested derivation (e.g. one master seed per target,
/// then one stream per replication of that target).
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    let mut state = master_seed ^ 0x9e3779b97f4a7c15u64.wrapping_mul(index.wrapping_add(1));
    splitmix64(&mut state)
}

impl RandomStream {
    pub fn from_seed(seed: u64) -> Self {
        Self::derive(seed, 0)
    }

    /// Stream for replication `index` of a run keyed by `master_seed`.
    pub fn derive(master_seed: u64, index: u64) -> Self {
        let mut state = master_seed ^ 0x6a09e667f3bcc908u64.wrapping_mul(index.wrapping_add(1));
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self {
            rng: ChaCha12Rng::from_seed(seed),
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.standard_normal()).collect()
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn below(&mut self, bound: usize) -> usize {
        self.rng.random_range(0..bound)
    }

    /// First `k` elements of a random permutation of `0..n`.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            idx.swap(i, j);
        }
        idx.truncate(k);
        idx
    }
}
