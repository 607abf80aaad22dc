//! Aggregate-fitness baselines: tournament, fitness-proportionate, uniform.

use alloc::vec::Vec;

use rand::Rng;

use crate::rng::RandomSource;

/// Tournament over mean errors: `size` entrants drawn uniformly with
/// replacement, lowest mean wins, ties broken uniformly.
pub(crate) fn tournament(means: &[f64], size: usize, rng: &mut RandomSource) -> usize {
    let mut best = f64::INFINITY;
    let mut tied: Vec<usize> = Vec::with_capacity(size);
    for _ in 0..size {
        let i = rng.random_range(0..means.len());
        let m = means[i];
        if m < best {
            best = m;
            tied.clear();
            tied.push(i);
        } else if m == best {
            tied.push(i);
        }
    }
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.random_range(0..tied.len())]
    }
}

/// Roulette weights `1 / (1 + mean error)`.
pub(crate) fn proportionate_weights(means: &[f64]) -> Vec<f64> {
    means.iter().map(|m| 1.0 / (1.0 + m)).collect()
}

pub(crate) fn uniform(n: usize, rng: &mut RandomSource) -> usize {
    rng.random_range(0..n)
}
