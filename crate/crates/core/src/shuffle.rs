//! Case orderings: uniform shuffles and weighted shuffles.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{usage, Result};
use crate::rng::RandomSource;

/// A permutation of the active case indices.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CaseOrdering(Vec<usize>);

impl CaseOrdering {
    /// Wraps a caller-supplied order, e.g. when enumerating orderings.
    pub fn from_vec(cases: Vec<usize>) -> Self {
        Self(cases)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    /// True when this is a permutation of `active`.
    pub fn is_permutation_of(&self, active: &[usize]) -> bool {
        let mut a = self.0.clone();
        let mut b = active.to_vec();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

/// Draws an ordering of `active`.
///
/// Without weights the ordering is a uniform permutation. With weights (one
/// per entry of `active`), cases are drawn one at a time with probability
/// `w_c / sum of remaining weights`; zero-weight cases follow every
/// positive-weight case, uniformly shuffled among themselves.
pub fn shuffled_order(active: &[usize], weights: Option<&[f64]>, rng: &mut RandomSource) -> Result<CaseOrdering> {
    match weights {
        None => {
            let mut order = active.to_vec();
            order.shuffle(rng);
            Ok(CaseOrdering(order))
        }
        Some(w) => weighted_order(active, w, rng),
    }
}

fn weighted_order(active: &[usize], weights: &[f64], rng: &mut RandomSource) -> Result<CaseOrdering> {
    if weights.len() != active.len() {
        return Err(usage!(
            "{} weights supplied for {} active cases",
            weights.len(),
            active.len()
        ));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(usage!("case weights must be finite and nonnegative, got {w}"));
    }
    if !active.is_empty() && weights.iter().all(|w| *w == 0.0) {
        return Err(usage!("at least one case weight must be positive"));
    }

    let mut positive: Vec<(usize, f64)> = Vec::new();
    let mut zeros: Vec<usize> = Vec::new();
    for (&case, &w) in active.iter().zip(weights) {
        if w > 0.0 {
            positive.push((case, w));
        } else {
            zeros.push(case);
        }
    }

    let mut order = Vec::with_capacity(active.len());
    while !positive.is_empty() {
        // Summed fresh each round so removals never accumulate rounding drift.
        let total: f64 = positive.iter().map(|(_, w)| w).sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = positive.len() - 1;
        for (k, (_, w)) in positive.iter().enumerate() {
            acc += w;
            if target < acc {
                pick = k;
                break;
            }
        }
        order.push(positive.remove(pick).0);
    }
    zeros.shuffle(rng);
    order.extend(zeros);
    Ok(CaseOrdering(order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn frequency_of_identity(weights: Option<&[f64]>, draws: u64) -> f64 {
        let mut hits = 0;
        for k in 0..draws {
            let mut rng = RandomSource::stream(11, k);
            let o = shuffled_order(&[0, 1], weights, &mut rng).unwrap();
            if o.as_slice() == [0, 1] {
                hits += 1;
            }
        }
        hits as f64 / draws as f64
    }

    #[test]
    fn uniform_two_cases_is_fair() {
        let f = frequency_of_identity(None, 10_000);
        assert!((f - 0.5).abs() < 0.02, "{f}");
    }

    #[test]
    fn equal_weights_match_uniform() {
        let f = frequency_of_identity(Some(&[2.0, 2.0]), 10_000);
        assert!((f - 0.5).abs() < 0.02, "{f}");
    }

    #[test]
    fn zero_weight_goes_last() {
        for seed in 0..200 {
            let mut rng = RandomSource::new(seed);
            let o = shuffled_order(&[0, 1], Some(&[1.0, 0.0]), &mut rng).unwrap();
            assert_eq!(o.as_slice(), &[0, 1]);
        }
    }

    #[test]
    fn weighted_first_pick_is_proportional() {
        // P(case 2 first) = 3 / (1 + 0 + 3) = 0.75
        let draws = 20_000;
        let mut first = 0;
        for k in 0..draws {
            let mut rng = RandomSource::stream(5, k);
            let o = shuffled_order(&[4, 9, 2], Some(&[1.0, 0.0, 3.0]), &mut rng).unwrap();
            assert_eq!(o.as_slice()[2], 9);
            if o.first() == Some(2) {
                first += 1;
            }
        }
        let f = first as f64 / draws as f64;
        assert!((f - 0.75).abs() < 0.015, "{f}");
    }

    #[test]
    fn bad_weights_rejected() {
        let mut rng = RandomSource::new(0);
        assert!(shuffled_order(&[0, 1], Some(&[1.0, -1.0]), &mut rng).is_err());
        assert!(shuffled_order(&[0, 1], Some(&[1.0, f64::NAN]), &mut rng).is_err());
        assert!(shuffled_order(&[0, 1], Some(&[0.0, 0.0]), &mut rng).is_err());
        assert!(shuffled_order(&[0, 1], Some(&[1.0]), &mut rng).is_err());
        assert!(shuffled_order(&[], Some(&[]), &mut rng).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn always_a_permutation(
            n in 1usize..20,
            seed in any::<u64>(),
            weights in proptest::collection::vec(prop_oneof![Just(0.0), 0.01f64..5.0], 20),
        ) {
            let active: Vec<usize> = (0..n).map(|c| c * 3).collect();
            let mut rng = RandomSource::new(seed);
            let o = shuffled_order(&active, None, &mut rng).unwrap();
            prop_assert!(o.is_permutation_of(&active));
            let mut w = weights[..n].to_vec();
            w[0] += 1.0;
            let o = shuffled_order(&active, Some(&w), &mut rng).unwrap();
            prop_assert!(o.is_permutation_of(&active));
        }

        #[test]
        fn deterministic_per_seed(seed in any::<u64>()) {
            let active = vec![0, 1, 2, 3, 4, 5];
            let w = vec![1.0, 2.0, 0.0, 3.0, 0.5, 0.0];
            let a = shuffled_order(&active, Some(&w), &mut RandomSource::new(seed)).unwrap();
            let b = shuffled_order(&active, Some(&w), &mut RandomSource::new(seed)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
