//! The generational loop.

use alloc::vec::Vec;

use rand::RngCore;

use super::behavioral_diversity;
use super::problem::{Problem, ProblemId};
use super::program::{vary, ExprProgram, PrimitiveSet, VariationRates, MAX_DEPTH};
use crate::error::{usage, Error, Result};
use crate::lazy::{lazy_lexicase_select, LazyEvaluator};
use crate::matrix::ErrorMatrix;
use crate::rng::RandomSource;
use crate::sampling::{DownsampleSchedule, Downsampler, SolveMatrix};
use crate::selectors::{failure_rate_weights, select_parents, SelectorConfig, Variant, WeightMetric};

/// Depths used by ramped half-and-half initialization.
pub const INIT_DEPTHS: core::ops::RangeInclusive<usize> = 2..=6;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct RunConfig {
    pub problem: ProblemId,
    pub population_size: usize,
    pub max_generations: usize,
    pub selector: SelectorConfig,
    pub downsample: DownsampleSchedule,
    /// Select through a [`LazyEvaluator`] (lexicase and weighted only).
    pub lazy: bool,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemId::Parity4,
            population_size: 500,
            max_generations: 100,
            selector: SelectorConfig::default(),
            downsample: DownsampleSchedule::default(),
            lazy: false,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            max_depth: MAX_DEPTH,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn rates(&self) -> VariationRates {
        VariationRates {
            crossover: self.crossover_rate,
            mutation: self.mutation_rate,
        }
    }

    /// Checks everything that can be known before the run starts.
    pub fn validate(&self) -> Result<()> {
        let config = |e: Error| match e {
            Error::Usage(m) => Error::Config(m),
            other => other,
        };
        if self.population_size < 2 {
            return Err(Error::Config("population_size must be at least 2".into()));
        }
        if self.max_depth < *INIT_DEPTHS.end() {
            return Err(Error::Config(alloc::format!(
                "max_depth must be at least {}",
                INIT_DEPTHS.end()
            )));
        }
        self.rates().validate().map_err(config)?;
        self.selector.validate().map_err(config)?;
        self.downsample.validate().map_err(config)?;
        let n_cases = self.problem.build().n_cases();
        let active = self.downsample.active_size(n_cases);
        if self.selector.variant == Variant::Batch && self.selector.batch_size > active {
            return Err(Error::Config(alloc::format!(
                "batch_size {} exceeds the {active} active cases per generation",
                self.selector.batch_size
            )));
        }
        if let WeightMetric::User(w) = &self.selector.weights {
            if self.selector.variant == Variant::Weighted && w.len() != n_cases {
                return Err(Error::Config(alloc::format!(
                    "{} user weights for {n_cases} training cases",
                    w.len()
                )));
            }
        }
        if self.lazy && !matches!(self.selector.variant, Variant::Lexicase | Variant::Weighted) {
            return Err(Error::Config(alloc::format!(
                "lazy evaluation supports lexicase and weighted selection, not {:?}",
                self.selector.variant
            )));
        }
        Ok(())
    }
}

/// One row per generation.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenerationRow {
    pub generation: usize,
    /// Lowest summed error over the active cases.
    pub best_error_sum: f64,
    /// Active cases solved by that individual.
    pub cases_solved_by_best: usize,
    /// Distinct error vectors over the active cases.
    pub behavioral_diversity: usize,
    pub active_cases: usize,
    pub population_evaluations: u64,
    pub estimation_evaluations: u64,
    /// Cumulative charged evaluations up to and including this generation.
    pub evaluations_used: u64,
    /// Wall time spent selecting parents; only recorded when a clock is given.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub selection_time_ns: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunRecord {
    pub generations: Vec<GenerationRow>,
    /// Some individual solved every training case.
    pub success: bool,
    /// That individual also solved every held-out case.
    pub generalization: bool,
    pub solution_generation: Option<usize>,
    pub total_evaluations: u64,
}

/// Source of wall-clock readings for selection timing.
pub trait Stopwatch {
    fn now_ns(&mut self) -> Option<u64>;
}

/// Records no timings.
pub struct NoClock;

impl Stopwatch for NoClock {
    fn now_ns(&mut self) -> Option<u64> {
        None
    }
}

/// Ramped half-and-half over depths 2..=6: individual `i` gets depth
/// `2 + i % 5`, built "full" for even `i / 5` and "grow" otherwise.
pub fn init_population(pset: &PrimitiveSet, size: usize, rng: &mut RandomSource) -> Result<Vec<ExprProgram>> {
    if size < 2 {
        return Err(usage!("population size must be at least 2"));
    }
    pset.validate()?;
    let n_depths = INIT_DEPTHS.end() - INIT_DEPTHS.start() + 1;
    Ok((0..size)
        .map(|i| {
            let depth = INIT_DEPTHS.start() + i % n_depths;
            if (i / n_depths).is_multiple_of(2) {
                ExprProgram::full(pset, depth, rng)
            } else {
                ExprProgram::grow(pset, depth, rng)
            }
        })
        .collect())
}

pub fn run_evolution(config: &RunConfig) -> Result<RunRecord> {
    run_evolution_timed(config, &mut NoClock)
}

/// [`run_evolution`] with selection timed by `clock`.
pub fn run_evolution_timed(config: &RunConfig, clock: &mut dyn Stopwatch) -> Result<RunRecord> {
    config.validate()?;
    let problem = config.problem.build();
    let n_train = problem.n_cases();
    let n = config.population_size;
    let solve_threshold = config.downsample.solve_threshold.max(problem.solve_threshold);

    let mut population = init_population(&problem.primitives, n, &mut RandomSource::stream(config.seed, 0))?;
    let mut downsampler = Downsampler::new(config.downsample.clone())?;
    let mut record = RunRecord {
        generations: Vec::new(),
        success: false,
        generalization: false,
        solution_generation: None,
        total_evaluations: 0,
    };

    for generation in 0..=config.max_generations {
        let mut rng = RandomSource::stream(config.seed, generation as u64 + 1);
        let step = downsampler.step(
            generation,
            n,
            n_train,
            |parents| estimate_solves(&population, parents, &problem, solve_threshold),
            &mut rng,
        )?;
        let active = step.active;
        let errors = evaluate_population(&population, &problem, &active)?;

        let (best, best_sum) = (0..n)
            .map(|i| (i, errors.row(i).iter().sum::<f64>()))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let cases_solved_by_best = errors
            .row(best)
            .iter()
            .filter(|&&e| e <= problem.solve_threshold)
            .count();
        let solver = (0..n).find(|&i| {
            errors.row(i).iter().all(|&e| e <= problem.solve_threshold) && problem.solves_all(&population[i])
        });
        let done = solver.is_some() || generation == config.max_generations;

        let mut population_evaluations = step.cost.population_evaluations;
        let mut selection_time_ns = None;
        let mut next = Vec::new();
        if !done {
            let base_seed = rng.next_u64();
            let started = clock.now_ns();
            let (parents, lazy_cells) = choose_parents(config, &errors, &active, 2 * n, base_seed)?;
            if let (Some(a), Some(b)) = (started, clock.now_ns()) {
                selection_time_ns = Some(b.saturating_sub(a));
            }
            if let Some(cells) = lazy_cells {
                population_evaluations = cells;
            }
            next = parents
                .chunks_exact(2)
                .map(|p| {
                    vary(
                        &[&population[p[0]], &population[p[1]]],
                        config.rates(),
                        &problem.primitives,
                        config.max_depth,
                        &mut rng,
                    )
                })
                .collect::<Result<_>>()?;
        } else if config.lazy {
            // No selection happens on the final generation.
            population_evaluations = 0;
        }

        record.total_evaluations += population_evaluations + step.cost.estimation_evaluations;
        record.generations.push(GenerationRow {
            generation,
            best_error_sum: best_sum,
            cases_solved_by_best,
            behavioral_diversity: behavioral_diversity(&errors),
            active_cases: active.len(),
            population_evaluations,
            estimation_evaluations: step.cost.estimation_evaluations,
            evaluations_used: record.total_evaluations,
            selection_time_ns,
        });

        if let Some(i) = solver {
            record.success = true;
            record.generalization = problem.generalizes(&population[i]);
            record.solution_generation = Some(generation);
        }
        if done {
            break;
        }
        population = next;
    }
    Ok(record)
}

fn estimate_solves(
    population: &[ExprProgram],
    parents: &[usize],
    problem: &Problem,
    threshold: f64,
) -> Result<SolveMatrix> {
    let n_cases = problem.n_cases();
    let solved = parents
        .iter()
        .flat_map(|&p| (0..n_cases).map(move |c| problem.case_error(&population[p], c) <= threshold))
        .collect();
    SolveMatrix::new(parents.len(), n_cases, solved)
}

/// `population x active` error matrix; column `k` is training case `active[k]`.
pub fn evaluate_population(population: &[ExprProgram], problem: &Problem, active: &[usize]) -> Result<ErrorMatrix> {
    let values = population
        .iter()
        .flat_map(|p| active.iter().map(move |&c| problem.case_error(p, c)))
        .collect();
    ErrorMatrix::new(population.len(), active.len(), values)
}

/// Parent indices, plus the charged cell count when selecting lazily.
fn choose_parents(
    config: &RunConfig,
    errors: &ErrorMatrix,
    active: &[usize],
    n_parents: usize,
    seed: u64,
) -> Result<(Vec<usize>, Option<u64>)> {
    let columns = errors.all_cases();
    let mut selector = config.selector.clone();
    if let WeightMetric::User(w) = &selector.weights {
        // Errors are stored per active case; realign training-case weights.
        selector.weights = WeightMetric::User(active.iter().map(|&c| w[c]).collect());
    }
    if !config.lazy {
        let picked = select_parents(errors, &columns, &selector, n_parents, seed)?;
        return Ok((picked.into_iter().map(|s| s.winner).collect(), None));
    }
    let weights = match (&selector.variant, &selector.weights) {
        (Variant::Weighted, WeightMetric::FailureRate) => {
            let w = failure_rate_weights(errors);
            if w.iter().all(|&x| x == 0.0) {
                None
            } else {
                Some(w)
            }
        }
        (Variant::Weighted, WeightMetric::User(w)) => Some(w.clone()),
        _ => None,
    };
    let mut evaluator = LazyEvaluator::new(errors.n_individuals(), errors.n_cases(), |i, c| {
        Ok::<_, core::convert::Infallible>(errors.get(i, c))
    })?;
    let mut parents = Vec::with_capacity(n_parents);
    for k in 0..n_parents as u64 {
        let s = lazy_lexicase_select(
            &mut evaluator,
            &columns,
            weights.as_deref(),
            &mut RandomSource::stream(seed, k),
        )?;
        parents.push(s.winner);
    }
    Ok((parents, Some(evaluator.cells_evaluated())))
}
