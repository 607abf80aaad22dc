//! Filtering selectors: lexicase, epsilon, batch and weighted lexicase.
//!
//! All four share [`run_filter`]: start from the whole population, keep the
//! (epsilon-)elite on each step of an ordering, stop as soon as one member is
//! left, and break a remaining tie uniformly.

use alloc::vec::Vec;

use rand::Rng;

use super::SelectionTrace;
use crate::elite::{check_epsilons, try_retain_within, widen};
use crate::error::{usage, Result};
use crate::matrix::{ErrorMatrix, PoolView};
use crate::rng::RandomSource;
use crate::shuffle::{shuffled_order, CaseOrdering};

pub(crate) struct FilterOutcome {
    pub pool: Vec<usize>,
    pub pool_sizes: Vec<usize>,
}

/// Filters `0..n_individuals` through `n_steps` steps. `score(i, s)` is the
/// error of individual `i` at step `s`; it is only requested for members of
/// the pool at that step.
pub(crate) fn run_filter<E>(
    n_individuals: usize,
    n_steps: usize,
    epsilon: impl Fn(usize) -> f64,
    mut score: impl FnMut(usize, usize) -> Result<f64, E>,
) -> Result<FilterOutcome, E> {
    let mut pool: Vec<usize> = (0..n_individuals).collect();
    let mut pool_sizes = Vec::new();
    for step in 0..n_steps {
        if pool.len() <= 1 {
            break;
        }
        try_retain_within(&mut pool, epsilon(step), |i| score(i, step))?;
        pool_sizes.push(pool.len());
    }
    Ok(FilterOutcome { pool, pool_sizes })
}

/// Uniform tie-break over the surviving pool. Consumes randomness only when
/// more than one member is left.
pub(crate) fn finish(outcome: FilterOutcome, ordering: CaseOrdering, rng: &mut RandomSource) -> SelectionTrace {
    let FilterOutcome { pool, pool_sizes } = outcome;
    let winner = if pool.len() == 1 {
        pool[0]
    } else {
        pool[rng.random_range(0..pool.len())]
    };
    SelectionTrace {
        ordering,
        cases_consumed: pool_sizes.len(),
        pool_sizes,
        final_tie_size: pool.len(),
        winner,
    }
}

fn infallible<T>(r: Result<T, core::convert::Infallible>) -> T {
    match r {
        Ok(v) => v,
    }
}

/// Lexicase selection over `active` with exact (ε = 0) elitism.
pub fn lexicase_select(
    matrix: &ErrorMatrix,
    active: &[usize],
    rng: &mut RandomSource,
) -> Result<(usize, SelectionTrace)> {
    matrix.check_active(active)?;
    let ordering = shuffled_order(active, None, rng)?;
    Ok(select_along(matrix, ordering, None, rng))
}

/// Lexicase where each step keeps members within `epsilons[case]` of the
/// pool's best. `epsilons` has one entry per matrix case and is widened as in
/// [`widened_epsilons`](crate::elite::widened_epsilons).
pub fn epsilon_lexicase_select(
    matrix: &ErrorMatrix,
    active: &[usize],
    epsilons: &[f64],
    rng: &mut RandomSource,
) -> Result<(usize, SelectionTrace)> {
    matrix.check_active(active)?;
    check_epsilons(matrix, epsilons)?;
    let ordering = shuffled_order(active, None, rng)?;
    let outcome = filter_outcome(matrix, ordering.as_slice(), |c| widened_at(matrix, epsilons, c));
    let trace = finish(outcome, ordering, rng);
    Ok((trace.winner, trace))
}

fn widened_at(matrix: &ErrorMatrix, epsilons: &[f64], case: usize) -> f64 {
    widen(epsilons[case], matrix.column(case).fold(0.0, f64::max))
}

/// Lexicase over a weighted case ordering. `weights` has one entry per
/// matrix case; only the entries of active cases are used.
pub fn weighted_lexicase_select(
    matrix: &ErrorMatrix,
    active: &[usize],
    weights: &[f64],
    rng: &mut RandomSource,
) -> Result<(usize, SelectionTrace)> {
    matrix.check_active(active)?;
    let w = active_weights(matrix, active, weights)?;
    let ordering = shuffled_order(active, Some(&w), rng)?;
    Ok(select_along(matrix, ordering, None, rng))
}

pub(crate) fn active_weights(matrix: &ErrorMatrix, active: &[usize], weights: &[f64]) -> Result<Vec<f64>> {
    if weights.len() != matrix.n_cases() {
        return Err(usage!(
            "expected one weight per case ({}), got {}",
            matrix.n_cases(),
            weights.len()
        ));
    }
    Ok(active.iter().map(|&c| weights[c]).collect())
}

pub(crate) fn select_along(
    matrix: &ErrorMatrix,
    ordering: CaseOrdering,
    epsilons: Option<&[f64]>,
    rng: &mut RandomSource,
) -> (usize, SelectionTrace) {
    let outcome = filter_outcome(matrix, ordering.as_slice(), |c| epsilons.map_or(0.0, |e| e[c]));
    let trace = finish(outcome, ordering, rng);
    (trace.winner, trace)
}

/// `epsilon(case)` is the threshold applied on `case`.
fn filter_outcome(matrix: &ErrorMatrix, cases: &[usize], epsilon: impl Fn(usize) -> f64) -> FilterOutcome {
    infallible(run_filter(
        matrix.n_individuals(),
        cases.len(),
        |s| epsilon(cases[s]),
        |i, s| Ok(matrix.get(i, cases[s])),
    ))
}

/// The pool left after filtering along a fixed `ordering` (before the final
/// random tie-break). Deterministic; useful for enumerating orderings.
/// Epsilons are widened as in [`epsilon_lexicase_select`].
pub fn filter_by_ordering(matrix: &ErrorMatrix, ordering: &[usize], epsilons: Option<&[f64]>) -> Result<PoolView> {
    matrix.check_active(ordering)?;
    if let Some(e) = epsilons {
        check_epsilons(matrix, e)?;
    }
    let outcome = filter_outcome(matrix, ordering, |c| epsilons.map_or(0.0, |e| widened_at(matrix, e, c)));
    Ok(PoolView::from_vec_unchecked(outcome.pool))
}

/// Batch lexicase: shuffle the active cases, cut the shuffle into
/// consecutive batches of `batch_size` (the last may be shorter), and filter
/// on each member's mean error per batch with ε = 0.
pub fn batch_lexicase_select(
    matrix: &ErrorMatrix,
    active: &[usize],
    batch_size: usize,
    rng: &mut RandomSource,
) -> Result<(usize, SelectionTrace)> {
    matrix.check_active(active)?;
    check_batch_size(batch_size, active.len())?;
    let ordering = shuffled_order(active, None, rng)?;
    let outcome = batch_outcome(matrix, ordering.as_slice(), batch_size);
    let trace = finish(outcome, ordering, rng);
    Ok((trace.winner, trace))
}

pub(crate) fn check_batch_size(batch_size: usize, n_active: usize) -> Result<()> {
    if batch_size < 1 {
        return Err(usage!("batch size must be at least 1"));
    }
    if batch_size > n_active {
        return Err(usage!("batch size {batch_size} exceeds the {n_active} active cases"));
    }
    Ok(())
}

fn batch_outcome(matrix: &ErrorMatrix, ordering: &[usize], batch_size: usize) -> FilterOutcome {
    let batches: Vec<&[usize]> = ordering.chunks(batch_size).collect();
    infallible(run_filter(
        matrix.n_individuals(),
        batches.len(),
        |_| 0.0,
        |i, s| {
            let b = batches[s];
            Ok(b.iter().map(|&c| matrix.get(i, c)).sum::<f64>() / b.len() as f64)
        },
    ))
}

/// Batch counterpart of [`filter_by_ordering`].
pub fn batch_filter_by_ordering(matrix: &ErrorMatrix, ordering: &[usize], batch_size: usize) -> Result<PoolView> {
    matrix.check_active(ordering)?;
    check_batch_size(batch_size, ordering.len())?;
    Ok(PoolView::from_vec_unchecked(
        batch_outcome(matrix, ordering, batch_size).pool,
    ))
}
