//! Case-elite filtering and MAD-based epsilons.

use alloc::vec::Vec;

use crate::error::{usage, Result};
use crate::matrix::{ErrorMatrix, PoolView};

/// Members of `pool` whose error on `case` is within `epsilon` of the pool's
/// best error on that case, in pool order. The minimizer always survives.
/// A positive `epsilon` is widened as in [`widened_epsilons`].
pub fn elite_survivors(matrix: &ErrorMatrix, pool: &PoolView, case: usize, epsilon: f64) -> Result<PoolView> {
    if case >= matrix.n_cases() {
        return Err(usage!("case index {case} out of range for {} cases", matrix.n_cases()));
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(usage!("epsilon must be nonnegative, got {epsilon}"));
    }
    let epsilon = widen(epsilon, matrix.column(case).fold(0.0, f64::max));
    let mut survivors = pool.as_slice().to_vec();
    retain_within(&mut survivors, epsilon, |i| matrix.get(i, case));
    Ok(PoolView::from_vec_unchecked(survivors))
}

/// Keeps the members whose score is at most `min + epsilon`. Scores are
/// requested exactly once per member.
pub(crate) fn retain_within<F: FnMut(usize) -> f64>(pool: &mut Vec<usize>, epsilon: f64, mut score: F) {
    let Ok(()) = try_retain_within::<_, core::convert::Infallible>(pool, epsilon, |i| Ok(score(i)));
}

pub(crate) fn try_retain_within<F, E>(pool: &mut Vec<usize>, epsilon: f64, mut score: F) -> Result<(), E>
where
    F: FnMut(usize) -> Result<f64, E>,
{
    let mut scores = Vec::with_capacity(pool.len());
    let mut best = f64::INFINITY;
    for &i in pool.iter() {
        let s = score(i)?;
        if s < best {
            best = s;
        }
        scores.push(s);
    }
    let threshold = best + epsilon;
    let mut k = 0;
    pool.retain(|_| {
        let keep = scores[k] <= threshold;
        k += 1;
        keep
    });
    Ok(())
}

/// Median of `values`; the mean of the two middle values for even lengths.
/// Reorders `values`. Returns `None` for an empty slice.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

/// Per-case median absolute deviation over the whole population:
/// `MAD_c = median_i |e(i,c) - median_j e(j,c)|`.
pub fn mad_epsilons(matrix: &ErrorMatrix) -> Vec<f64> {
    let mut column = Vec::with_capacity(matrix.n_individuals());
    (0..matrix.n_cases())
        .map(|c| {
            column.clear();
            column.extend(matrix.column(c));
            let m = median(&mut column).unwrap_or(0.0);
            for v in column.iter_mut() {
                *v = (*v - m).abs();
            }
            median(&mut column).unwrap_or(0.0)
        })
        .collect()
}

/// Rounding slack added to positive epsilons, relative to the column's
/// largest error.
pub const EPSILON_SLACK: f64 = 64.0 * f64::EPSILON;

pub(crate) fn widen(epsilon: f64, column_max: f64) -> f64 {
    if epsilon > 0.0 {
        epsilon + EPSILON_SLACK * column_max
    } else {
        epsilon
    }
}

/// The thresholds the epsilon filters actually apply: each positive
/// `epsilons[c]` plus [`EPSILON_SLACK`] times the largest error in column
/// `c`. Without the slack, members exactly `epsilon` behind the best could
/// drop out after a rescaling of the case, purely through rounding in the
/// MAD. Zero epsilons are left exact.
pub fn widened_epsilons(matrix: &ErrorMatrix, epsilons: &[f64]) -> Vec<f64> {
    epsilons
        .iter()
        .enumerate()
        .map(|(c, &e)| {
            if e > 0.0 {
                widen(e, matrix.column(c).fold(0.0, f64::max))
            } else {
                e
            }
        })
        .collect()
}

/// Validates a full-length epsilon vector (one entry per matrix case).
pub(crate) fn check_epsilons(matrix: &ErrorMatrix, epsilons: &[f64]) -> Result<()> {
    if epsilons.len() != matrix.n_cases() {
        return Err(usage!(
            "expected one epsilon per case ({}), got {}",
            matrix.n_cases(),
            epsilons.len()
        ));
    }
    if let Some((c, e)) = epsilons
        .iter()
        .enumerate()
        .find(|(_, e)| !(e.is_finite() && **e >= 0.0))
    {
        return Err(usage!("epsilon for case {c} must be finite and nonnegative, got {e}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn ab() -> ErrorMatrix {
        ErrorMatrix::from_rows(&[[0.0, 5.0], [0.0, 3.0]]).unwrap()
    }

    #[test]
    fn survivors_on_tied_case() {
        let m = ab();
        let pool = PoolView::full(&m);
        assert_eq!(elite_survivors(&m, &pool, 0, 0.0).unwrap().as_slice(), &[0, 1]);
        assert_eq!(elite_survivors(&m, &pool, 1, 0.0).unwrap().as_slice(), &[1]);
    }

    #[test]
    fn singleton_pool_survives() {
        let m = ab();
        let pool = PoolView::new(vec![0], 2).unwrap();
        for case in 0..2 {
            for eps in [0.0, 1.0, 100.0] {
                assert_eq!(elite_survivors(&m, &pool, case, eps).unwrap(), pool);
            }
        }
    }

    #[test]
    fn epsilon_threshold_is_inclusive() {
        let m = ErrorMatrix::from_rows(&[[0.0], [0.05], [0.3]]).unwrap();
        let s = elite_survivors(&m, &PoolView::full(&m), 0, 0.05).unwrap();
        assert_eq!(s.as_slice(), &[0, 1]);
    }

    #[test]
    fn out_of_range_case_is_usage_error() {
        let m = ab();
        assert!(matches!(
            elite_survivors(&m, &PoolView::full(&m), 2, 0.0),
            Err(crate::Error::Usage(_))
        ));
        assert!(elite_survivors(&m, &PoolView::full(&m), 0, -1.0).is_err());
    }

    #[test]
    fn preserves_pool_order() {
        let m = ErrorMatrix::from_rows(&[[1.0], [0.0], [0.0]]).unwrap();
        let pool = PoolView::new(vec![2, 0, 1], 3).unwrap();
        assert_eq!(elite_survivors(&m, &pool, 0, 0.0).unwrap().as_slice(), &[2, 1]);
    }

    #[test]
    fn mad_hand_values() {
        let m = ErrorMatrix::from_rows(&[[0.0, 3.0, 0.0], [0.05, 3.0, 1.0], [0.3, 3.0, 0.0], [1.0, 3.0, 1.0]]).unwrap();
        let mad = mad_epsilons(&m);
        // median 0.175, deviations (0.175, 0.125, 0.125, 0.825)
        assert!((mad[0] - 0.15).abs() < 1e-15);
        assert_eq!(mad[1], 0.0);
        assert_eq!(mad[2], 0.5);
        let two = ErrorMatrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert_eq!(mad_epsilons(&two), vec![0.5]);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    proptest! {
        #[test]
        fn huge_epsilon_keeps_everyone(rows in proptest::collection::vec(proptest::collection::vec(0.0f64..10.0, 3), 1..8)) {
            let m = ErrorMatrix::from_rows(&rows).unwrap();
            let pool = PoolView::full(&m);
            for c in 0..3 {
                let spread = m.column(c).fold(0.0f64, f64::max);
                prop_assert_eq!(elite_survivors(&m, &pool, c, spread).unwrap(), pool.clone());
            }
        }

        #[test]
        fn survivors_contain_a_minimizer(rows in proptest::collection::vec(proptest::collection::vec(0.0f64..10.0, 2), 1..8), eps in 0.0f64..3.0) {
            let m = ErrorMatrix::from_rows(&rows).unwrap();
            let pool = PoolView::full(&m);
            for c in 0..2 {
                let s = elite_survivors(&m, &pool, c, eps).unwrap();
                let best = m.column(c).fold(f64::INFINITY, f64::min);
                prop_assert!(s.as_slice().iter().any(|&i| m.get(i, c) == best));
                prop_assert!(s.as_slice().iter().all(|&i| m.get(i, c) <= best + eps));
            }
        }
    }
}
