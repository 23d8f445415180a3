//! Replicate-keyed random streams.
//!
//! Replicate `r` of experiment `id` under master seed `s` always draws from
//! the same ChaCha8 stream, so results do not depend on how replicates are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type Rng = ChaCha8Rng;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn stream(seed: u64, experiment: &str, replicate: u64) -> Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&fnv1a(experiment.as_bytes()).to_le_bytes());
    key[16..24].copy_from_slice(&replicate.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Runs `f` once per replicate in parallel; output order is replicate order.
pub fn replicates<T, F>(seed: u64, experiment: &str, reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Rng, usize) -> T + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, experiment, r as u64);
            f(&mut rng, r)
        })
        .collect()
}

/// Parallel fold over replicates with a commutative, associative merge.
pub fn fold_replicates<A, F, M>(
    seed: u64,
    experiment: &str,
    reps: usize,
    init: impl Fn() -> A + Sync + Send,
    step: F,
    merge: M,
) -> A
where
    A: Send,
    F: Fn(&mut A, &mut Rng, usize) + Sync,
    M: Fn(A, A) -> A + Sync + Send,
{
    (0..reps)
        .into_par_iter()
        .fold(&init, |mut acc, r| {
            let mut rng = stream(seed, experiment, r as u64);
            step(&mut acc, &mut rng, r);
            acc
        })
        .reduce(&init, merge)
}
