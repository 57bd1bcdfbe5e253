//! Seeded randomness for shuffling schedules.
//!
//! Generator: ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`), which is
//! counter based. `stream(seed, k)` keys the cipher with the 64-bit `seed`
//! in little-endian order in the first 8 key bytes (remaining 24 bytes zero)
//! and selects ChaCha stream number `k`, starting at word position 0. Epoch
//! `k` of a randomized strategy always draws from `stream(seed, k)`, so
//! epochs are independent of one another and of evaluation order.
//!
//! Permutations are drawn by Fisher–Yates from the last position down, with
//! `j = random_range(0..=i)` from `rand` 0.9.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(k);
    rng
}

/// Uniform permutation of `0..n`.
pub fn fisher_yates<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// `n` i.i.d. uniform indices in `0..n`.
pub fn iid_indices<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}
