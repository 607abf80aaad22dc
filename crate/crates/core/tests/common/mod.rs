//! Brute-force reference computations, independent of the library's
//! recursion and samplers.
#![allow(dead_code)]

use lexicase_core::{ErrorMatrix, RandomSource};
use rand::Rng;

pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Probability of drawing `order` by successive weighted sampling without
/// replacement, zero-weight cases last and uniform among themselves.
/// `weight_of` maps a case to its weight.
pub fn ordering_probability(order: &[usize], weight_of: &dyn Fn(usize) -> f64) -> f64 {
    let zeros = order.iter().filter(|&&c| weight_of(c) == 0.0).count();
    let positive = order.len() - zeros;
    if order[..positive].iter().any(|&c| weight_of(c) == 0.0) {
        return 0.0;
    }
    let mut remaining: f64 = order[..positive].iter().map(|&c| weight_of(c)).sum();
    let mut p = 1.0;
    for &c in &order[..positive] {
        p *= weight_of(c) / remaining;
        remaining -= weight_of(c);
    }
    p / factorial(zeros)
}

/// Selection distribution obtained by enumerating every ordering of
/// `active`, weighting it, filtering with `filter`, and splitting each
/// ordering's mass uniformly over the surviving pool.
pub fn enumerate_distribution(
    n_individuals: usize,
    active: &[usize],
    weight_of: Option<&dyn Fn(usize) -> f64>,
    filter: &dyn Fn(&[usize]) -> Vec<usize>,
) -> Vec<f64> {
    let mut probs = vec![0.0; n_individuals];
    let uniform = 1.0 / factorial(active.len());
    for order in permutations(active) {
        let p = match weight_of {
            None => uniform,
            Some(w) => ordering_probability(&order, w),
        };
        if p == 0.0 {
            continue;
        }
        let pool = filter(&order);
        for &i in &pool {
            probs[i] += p / pool.len() as f64;
        }
    }
    probs
}

/// Lexicase by enumeration, with a hand-written filter. Positive epsilons
/// get the library's rounding slack of 64 machine epsilons times the
/// column's largest error.
pub fn brute_force_lexicase(m: &ErrorMatrix, active: &[usize], epsilons: Option<&[f64]>) -> Vec<f64> {
    let slack = |c: usize| 64.0 * f64::EPSILON * (0..m.n_individuals()).map(|i| m.get(i, c)).fold(0.0, f64::max);
    let filter = |order: &[usize]| -> Vec<usize> {
        let mut pool: Vec<usize> = (0..m.n_individuals()).collect();
        for &c in order {
            let best = pool.iter().map(|&i| m.get(i, c)).fold(f64::INFINITY, f64::min);
            let eps = match epsilons {
                Some(e) if e[c] > 0.0 => e[c] + slack(c),
                _ => 0.0,
            };
            pool.retain(|&i| m.get(i, c) <= best + eps);
        }
        pool
    };
    enumerate_distribution(m.n_individuals(), active, None, &filter)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Random small matrix: individuals drawn from at most `max_distinct`
/// prototype rows. Values are small integers, continuous, or a per-entry mix
/// of both.
pub fn random_matrix(rng: &mut RandomSource, max_distinct: usize, max_rows: usize, max_cases: usize) -> ErrorMatrix {
    let distinct = rng.random_range(1..=max_distinct);
    let cases = rng.random_range(1..=max_cases);
    let p_discrete = [0.0, 0.5, 1.0][rng.random_range(0..3)];
    let protos: Vec<Vec<f64>> = (0..distinct)
        .map(|_| {
            (0..cases)
                .map(|_| {
                    if rng.random_bool(p_discrete) {
                        rng.random_range(0..3) as f64
                    } else {
                        rng.random::<f64>()
                    }
                })
                .collect()
        })
        .collect();
    let n_rows = rng.random_range(distinct..=max_rows.max(distinct));
    let rows: Vec<Vec<f64>> = (0..n_rows)
        .map(|k| {
            if k < distinct {
                protos[k].clone()
            } else {
                protos[rng.random_range(0..distinct)].clone()
            }
        })
        .collect();
    ErrorMatrix::from_rows(&rows).unwrap()
}

/// All 3x3 matrices with entries in {0, 1}.
pub fn binary_3x3() -> impl Iterator<Item = ErrorMatrix> {
    (0u32..512).map(|bits| {
        let v = (0..9).map(|k| f64::from((bits >> k) & 1)).collect();
        ErrorMatrix::new(3, 3, v).unwrap()
    })
}
