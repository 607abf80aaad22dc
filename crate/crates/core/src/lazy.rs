//! Lexicase over on-demand evaluations.
//!
//! A [`LazyEvaluator`] wraps an `(individual, case) -> error` function with a
//! memo grid. [`lazy_lexicase_select`] asks for an error only when the
//! individual is still in the pool at the step that filters on that case.
//! The selection (ordering, filtering, tie-break, randomness consumed) is the
//! same as the eager selectors, so a shared seed gives identical results.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt::Display;

use crate::error::{usage, Error, Result};
use crate::rng::RandomSource;
use crate::selectors::{finish, run_filter, SelectionTrace};
use crate::shuffle::shuffled_order;

/// Memoizing evaluator. Each `(individual, case)` cell is computed at most
/// once for the evaluator's lifetime (one generation).
pub struct LazyEvaluator<F> {
    eval: F,
    n_individuals: usize,
    n_cases: usize,
    memo: Vec<Option<f64>>,
    cells_evaluated: u64,
    cells_requested: u64,
}

impl<F, E> LazyEvaluator<F>
where
    F: FnMut(usize, usize) -> Result<f64, E>,
    E: Display,
{
    pub fn new(n_individuals: usize, n_cases: usize, eval: F) -> Result<Self> {
        if n_individuals == 0 || n_cases == 0 {
            return Err(usage!("lazy evaluator needs at least one individual and one case"));
        }
        Ok(Self {
            eval,
            n_individuals,
            n_cases,
            memo: alloc::vec![None; n_individuals * n_cases],
            cells_evaluated: 0,
            cells_requested: 0,
        })
    }

    pub fn n_individuals(&self) -> usize {
        self.n_individuals
    }

    pub fn n_cases(&self) -> usize {
        self.n_cases
    }

    /// Distinct cells computed so far.
    pub fn cells_evaluated(&self) -> u64 {
        self.cells_evaluated
    }

    /// Lookups so far, including memo hits.
    pub fn cells_requested(&self) -> u64 {
        self.cells_requested
    }

    /// The error of `individual` on `case`, computing it on first request.
    pub fn get(&mut self, individual: usize, case: usize) -> Result<f64> {
        if individual >= self.n_individuals || case >= self.n_cases {
            return Err(usage!(
                "cell ({individual}, {case}) outside the {}x{} evaluator",
                self.n_individuals,
                self.n_cases
            ));
        }
        self.cells_requested += 1;
        let slot = individual * self.n_cases + case;
        if let Some(v) = self.memo[slot] {
            return Ok(v);
        }
        let v = (self.eval)(individual, case).map_err(|e| Error::Evaluation {
            individual,
            case,
            reason: e.to_string(),
        })?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Evaluation {
                individual,
                case,
                reason: alloc::format!("error {v} is not a finite nonnegative number"),
            });
        }
        self.memo[slot] = Some(v);
        self.cells_evaluated += 1;
        Ok(v)
    }

    /// Number of memo cells holding a value.
    pub fn memoized_cells(&self) -> usize {
        self.memo.iter().filter(|c| c.is_some()).count()
    }
}

/// Outcome of one lazy selection event.
#[derive(Clone, Debug, PartialEq)]
pub struct LazySelection {
    pub winner: usize,
    pub trace: SelectionTrace,
    /// Cells newly computed by this event.
    pub cells_evaluated: u64,
}

/// Lexicase (or weighted lexicase when `weights` is given, one weight per
/// evaluator case) that only evaluates the cells it filters on.
pub fn lazy_lexicase_select<F, E>(
    evaluator: &mut LazyEvaluator<F>,
    active: &[usize],
    weights: Option<&[f64]>,
    rng: &mut RandomSource,
) -> Result<LazySelection>
where
    F: FnMut(usize, usize) -> Result<f64, E>,
    E: Display,
{
    if active.is_empty() {
        return Err(usage!("active case set is empty"));
    }
    if let Some(&c) = active.iter().find(|&&c| c >= evaluator.n_cases) {
        return Err(usage!("case index {c} out of range for {} cases", evaluator.n_cases));
    }
    let aligned: Option<Vec<f64>> = match weights {
        None => None,
        Some(w) if w.len() == evaluator.n_cases => Some(active.iter().map(|&c| w[c]).collect()),
        Some(w) => {
            return Err(usage!(
                "expected one weight per case ({}), got {}",
                evaluator.n_cases,
                w.len()
            ))
        }
    };
    let ordering = shuffled_order(active, aligned.as_deref(), rng)?;
    let before = evaluator.cells_evaluated;
    let cases = ordering.as_slice();
    let outcome = run_filter(
        evaluator.n_individuals,
        cases.len(),
        |_| 0.0,
        |i, s| evaluator.get(i, cases[s]),
    )?;
    let trace = finish(outcome, ordering, rng);
    Ok(LazySelection {
        winner: trace.winner,
        trace,
        cells_evaluated: evaluator.cells_evaluated - before,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ErrorMatrix;
    use crate::selectors::{lexicase_select, weighted_lexicase_select};
    use alloc::string::String;

    fn grid(n: usize, m: usize, seed: u64) -> ErrorMatrix {
        use rand::Rng;
        let mut rng = RandomSource::new(seed);
        let v = (0..n * m).map(|_| rng.random::<f64>()).collect();
        ErrorMatrix::new(n, m, v).unwrap()
    }

    fn evaluator(m: &ErrorMatrix) -> LazyEvaluator<impl FnMut(usize, usize) -> Result<f64, String> + '_> {
        LazyEvaluator::new(m.n_individuals(), m.n_cases(), move |i, c| Ok(m.get(i, c))).unwrap()
    }

    #[test]
    fn unique_first_minimizer_costs_one_column() {
        let m = grid(10, 5, 1);
        let mut ev = evaluator(&m);
        let s = lazy_lexicase_select(&mut ev, &[0, 1, 2, 3, 4], None, &mut RandomSource::new(4)).unwrap();
        assert_eq!(s.cells_evaluated, 10);
        assert_eq!(s.trace.cases_consumed, 1);
    }

    #[test]
    fn memo_caps_at_grid_size() {
        let rows: Vec<[f64; 10]> = (0..10).map(|i| [(i % 2) as f64; 10]).collect();
        let m = ErrorMatrix::from_rows(&rows).unwrap();
        let mut ev = evaluator(&m);
        let active: Vec<usize> = (0..10).collect();
        for k in 0..300 {
            lazy_lexicase_select(&mut ev, &active, None, &mut RandomSource::stream(8, k)).unwrap();
        }
        assert!(ev.cells_evaluated() <= 100);
        assert_eq!(ev.cells_evaluated() as usize, ev.memoized_cells());
        assert!(ev.cells_requested() >= ev.cells_evaluated());
    }

    #[test]
    fn matches_eager_selection() {
        for seed in 0..200 {
            let m = ErrorMatrix::new(6, 4, (0..24).map(|k| ((k * 7 + seed as usize) % 3) as f64).collect()).unwrap();
            let active = [0, 1, 2, 3];
            let eager = lexicase_select(&m, &active, &mut RandomSource::new(seed)).unwrap();
            let mut ev = evaluator(&m);
            let lazy = lazy_lexicase_select(&mut ev, &active, None, &mut RandomSource::new(seed)).unwrap();
            assert_eq!((lazy.winner, lazy.trace), eager);
            let w = [0.5, 2.0, 0.0, 1.0];
            let eager = weighted_lexicase_select(&m, &active, &w, &mut RandomSource::new(seed)).unwrap();
            let mut ev = evaluator(&m);
            let lazy = lazy_lexicase_select(&mut ev, &active, Some(&w), &mut RandomSource::new(seed)).unwrap();
            assert_eq!((lazy.winner, lazy.trace), eager);
        }
    }

    #[test]
    fn evaluation_failure_names_the_cell() {
        let mut ev = LazyEvaluator::new(3, 2, |i, c| if i == 1 && c == 1 { Err("boom") } else { Ok(0.0) }).unwrap();
        match ev.get(1, 1) {
            Err(Error::Evaluation {
                individual,
                case,
                reason,
            }) => {
                assert_eq!((individual, case), (1, 1));
                assert_eq!(reason, "boom");
            }
            other => panic!("{other:?}"),
        }
        let mut bad = LazyEvaluator::new(1, 1, |_, _| Ok::<_, &str>(-1.0)).unwrap();
        assert!(matches!(bad.get(0, 0), Err(Error::Evaluation { .. })));
        let mut ev2 = LazyEvaluator::new(2, 2, |i, _| if i == 0 { Ok(0.0) } else { Err("nope") }).unwrap();
        assert!(lazy_lexicase_select(&mut ev2, &[0, 1], None, &mut RandomSource::new(0)).is_err());
    }
}
