//! Parent-selection operators.
//!
//! The free functions ([`lexicase_select`] and friends) run a single
//! selection event against a [`RandomSource`]. [`Selector`] precomputes
//! per-generation quantities (MAD epsilons, case weights, mean errors,
//! plexicase distributions) once, and [`select_parents`] runs many events,
//! each on its own derived stream.

mod baseline;
mod lexicase;

use alloc::vec::Vec;

pub(crate) use lexicase::{active_weights, finish, run_filter};
pub use lexicase::{
    batch_filter_by_ordering, batch_lexicase_select, epsilon_lexicase_select, filter_by_ordering, lexicase_select,
    weighted_lexicase_select,
};

use crate::elite::{check_epsilons, mad_epsilons, widened_epsilons};
use crate::error::{usage, Result};
use crate::matrix::ErrorMatrix;
use crate::probability::{plexicase_distribution, CdfSampler};
use crate::rng::RandomSource;
use crate::shuffle::{shuffled_order, CaseOrdering};

/// What happened during one filtering selection.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SelectionTrace {
    pub ordering: CaseOrdering,
    /// Pool size after each filtering step. Non-increasing.
    pub pool_sizes: Vec<usize>,
    pub cases_consumed: usize,
    pub final_tie_size: usize,
    pub winner: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Variant {
    Lexicase,
    Epsilon,
    Batch,
    Weighted,
    /// Samples from the plexicase distribution (see [`crate::probability`]).
    Plexicase,
    Tournament,
    FitnessProportionate,
    UniformRandom,
}

impl Variant {
    pub fn is_baseline(self) -> bool {
        matches!(
            self,
            Variant::Tournament | Variant::FitnessProportionate | Variant::UniformRandom
        )
    }

    /// Variants that filter along a case ordering and produce a trace.
    pub fn is_filtering(self) -> bool {
        matches!(
            self,
            Variant::Lexicase | Variant::Epsilon | Variant::Batch | Variant::Weighted
        )
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EpsilonSource {
    Zero,
    /// Per-case median absolute deviation of the current population.
    #[default]
    Mad,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WeightMetric {
    #[default]
    Uniform,
    /// `w_c` = fraction of the population with nonzero error on case `c`.
    FailureRate,
    /// One weight per matrix case.
    User(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SelectorConfig {
    pub variant: Variant,
    pub epsilon: EpsilonSource,
    pub batch_size: usize,
    pub weights: WeightMetric,
    pub tournament_size: usize,
    /// Plexicase pressure exponent.
    pub alpha: f64,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Lexicase,
            epsilon: EpsilonSource::default(),
            batch_size: 2,
            weights: WeightMetric::default(),
            tournament_size: 2,
            alpha: 1.0,
        }
    }
}

impl SelectorConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 1 {
            return Err(usage!("batch_size must be at least 1"));
        }
        if self.tournament_size < 1 {
            return Err(usage!("tournament_size must be at least 1"));
        }
        if let EpsilonSource::Fixed(e) = self.epsilon {
            if !(e.is_finite() && e >= 0.0) {
                return Err(usage!("fixed epsilon must be finite and nonnegative, got {e}"));
            }
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(usage!("alpha must be positive, got {}", self.alpha));
        }
        Ok(())
    }
}

/// Failure-rate case weights: the fraction of individuals with nonzero error
/// on each case.
pub fn failure_rate_weights(matrix: &ErrorMatrix) -> Vec<f64> {
    let n = matrix.n_individuals() as f64;
    (0..matrix.n_cases())
        .map(|c| matrix.column(c).filter(|e| *e > 0.0).count() as f64 / n)
        .collect()
}

/// One selection event's result.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub winner: usize,
    /// Present for the filtering variants.
    pub trace: Option<SelectionTrace>,
}

enum Prepared {
    Lexicase,
    Epsilon(Vec<f64>),
    Batch(usize),
    /// Weights aligned with the active set.
    Weighted(Vec<f64>),
    Plexicase(CdfSampler),
    Tournament {
        size: usize,
        means: Vec<f64>,
    },
    Proportionate(CdfSampler),
    Uniform,
}

/// A selector bound to one matrix and active case set, with its
/// per-generation quantities computed.
pub struct Selector<'a> {
    matrix: &'a ErrorMatrix,
    active: Vec<usize>,
    prepared: Prepared,
}

impl<'a> Selector<'a> {
    pub fn prepare(matrix: &'a ErrorMatrix, active: &[usize], config: &SelectorConfig) -> Result<Self> {
        config.validate()?;
        matrix.check_active(active)?;
        let means = || -> Vec<f64> {
            (0..matrix.n_individuals())
                .map(|i| matrix.mean_error(i, active))
                .collect()
        };
        let prepared = match config.variant {
            Variant::Lexicase => Prepared::Lexicase,
            Variant::Epsilon => {
                let eps = match &config.epsilon {
                    EpsilonSource::Zero => alloc::vec![0.0; matrix.n_cases()],
                    EpsilonSource::Mad => mad_epsilons(matrix),
                    EpsilonSource::Fixed(e) => alloc::vec![*e; matrix.n_cases()],
                };
                check_epsilons(matrix, &eps)?;
                Prepared::Epsilon(widened_epsilons(matrix, &eps))
            }
            Variant::Batch => {
                lexicase::check_batch_size(config.batch_size, active.len())?;
                Prepared::Batch(config.batch_size)
            }
            Variant::Weighted => {
                let full = match &config.weights {
                    WeightMetric::Uniform => alloc::vec![1.0; matrix.n_cases()],
                    WeightMetric::FailureRate => {
                        let w = failure_rate_weights(matrix);
                        // Nobody fails anywhere: every order is equivalent.
                        if active.iter().all(|&c| w[c] == 0.0) {
                            alloc::vec![1.0; matrix.n_cases()]
                        } else {
                            w
                        }
                    }
                    WeightMetric::User(w) => w.clone(),
                };
                let w = active_weights(matrix, active, &full)?;
                // Surface weight errors here rather than on the first event.
                shuffled_order(active, Some(&w), &mut RandomSource::new(0))?;
                Prepared::Weighted(w)
            }
            Variant::Plexicase => {
                let dist = plexicase_distribution(matrix, active, config.alpha, None)?;
                Prepared::Plexicase(dist.sampler())
            }
            Variant::Tournament => Prepared::Tournament {
                size: config.tournament_size,
                means: means(),
            },
            Variant::FitnessProportionate => {
                Prepared::Proportionate(CdfSampler::from_weights(&baseline::proportionate_weights(&means()))?)
            }
            Variant::UniformRandom => Prepared::Uniform,
        };
        Ok(Self {
            matrix,
            active: active.to_vec(),
            prepared,
        })
    }

    pub fn select(&self, rng: &mut RandomSource) -> Result<Selection> {
        let m = self.matrix;
        let traced = |(winner, trace): (usize, SelectionTrace)| Selection {
            winner,
            trace: Some(trace),
        };
        let plain = |winner| Selection { winner, trace: None };
        Ok(match &self.prepared {
            Prepared::Lexicase => {
                let ordering = shuffled_order(&self.active, None, rng)?;
                traced(lexicase::select_along(m, ordering, None, rng))
            }
            Prepared::Epsilon(eps) => {
                let ordering = shuffled_order(&self.active, None, rng)?;
                traced(lexicase::select_along(m, ordering, Some(eps), rng))
            }
            Prepared::Batch(size) => traced(batch_lexicase_select(m, &self.active, *size, rng)?),
            Prepared::Weighted(w) => {
                let ordering = shuffled_order(&self.active, Some(w), rng)?;
                traced(lexicase::select_along(m, ordering, None, rng))
            }
            Prepared::Plexicase(sampler) => plain(sampler.sample(rng)),
            Prepared::Tournament { size, means } => plain(baseline::tournament(means, *size, rng)),
            Prepared::Proportionate(sampler) => plain(sampler.sample(rng)),
            Prepared::Uniform => plain(baseline::uniform(m.n_individuals(), rng)),
        })
    }
}

/// One aggregate-baseline selection event.
pub fn baseline_select(
    matrix: &ErrorMatrix,
    active: &[usize],
    config: &SelectorConfig,
    rng: &mut RandomSource,
) -> Result<usize> {
    if !config.variant.is_baseline() {
        return Err(usage!("{:?} is not a baseline selector", config.variant));
    }
    Ok(Selector::prepare(matrix, active, config)?.select(rng)?.winner)
}

/// `n_parents` independent selections. Event `k` draws from
/// `RandomSource::stream(seed, k)`, so the result depends only on the inputs
/// and `seed`, not on the order events are executed in.
pub fn select_parents(
    matrix: &ErrorMatrix,
    active: &[usize],
    config: &SelectorConfig,
    n_parents: usize,
    seed: u64,
) -> Result<Vec<Selection>> {
    if n_parents < 1 {
        return Err(usage!("n_parents must be at least 1"));
    }
    let selector = Selector::prepare(matrix, active, config)?;
    (0..n_parents as u64)
        .map(|k| selector.select(&mut RandomSource::stream(seed, k)))
        .collect()
}
