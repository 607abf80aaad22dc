//! Selection distributions of one matrix.

use lexicase_core::probability::{
    baseline_distribution, empirical_distribution, exact_distribution_with, plexicase_distribution, total_variation,
    ExactOptions,
};
use lexicase_core::selectors::{EpsilonSource, SelectorConfig, Variant};
use lexicase_core::{mad_epsilons, Error, ErrorMatrix, SelectionDistribution};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Clone, Debug)]
pub struct ProbsOptions {
    pub selector: SelectorConfig,
    pub trials: u64,
    pub alpha: f64,
    pub seed: u64,
    pub exact: ExactOptions,
}

impl Default for ProbsOptions {
    fn default() -> Self {
        Self {
            selector: SelectorConfig::new(Variant::Lexicase),
            trials: 100_000,
            alpha: 1.0,
            seed: 0,
            exact: ExactOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TotalVariation {
    pub exact_plexicase: Option<f64>,
    pub exact_empirical: Option<f64>,
    pub plexicase_empirical: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbsReport {
    pub individuals: Vec<String>,
    pub selector: Variant,
    pub trials: u64,
    pub alpha: f64,
    /// Absent when the instance is outside the oracle guard or the selector
    /// has no exact form.
    pub exact: Option<Vec<f64>>,
    pub exact_omitted: Option<String>,
    pub plexicase: Vec<f64>,
    pub empirical: Vec<f64>,
    pub total_variation: TotalVariation,
}

fn epsilons(matrix: &ErrorMatrix, config: &SelectorConfig) -> Option<Vec<f64>> {
    if config.variant != Variant::Epsilon {
        return None;
    }
    Some(match config.epsilon {
        EpsilonSource::Zero => vec![0.0; matrix.n_cases()],
        EpsilonSource::Mad => mad_epsilons(matrix),
        EpsilonSource::Fixed(e) => vec![e; matrix.n_cases()],
    })
}

/// Exact distribution of the configured selector. The inner error is the
/// reason it was omitted.
fn exact_for(
    matrix: &ErrorMatrix,
    opts: &ProbsOptions,
    eps: Option<&[f64]>,
) -> Result<Result<SelectionDistribution, String>> {
    let active = matrix.all_cases();
    let v = opts.selector.variant;
    let dist = match v {
        Variant::Lexicase | Variant::Epsilon => exact_distribution_with(matrix, &active, eps, &opts.exact),
        Variant::Plexicase => plexicase_distribution(matrix, &active, opts.selector.alpha, None),
        _ if v.is_baseline() => baseline_distribution(matrix, &active, &opts.selector),
        _ => return Ok(Err(format!("no exact distribution for {v:?} selection"))),
    };
    match dist {
        Ok(d) => Ok(Ok(d)),
        Err(Error::Resource(reason)) => Ok(Err(reason)),
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_probs(matrix: &ErrorMatrix, opts: &ProbsOptions) -> Result<ProbsReport> {
    if !(opts.alpha.is_finite() && opts.alpha > 0.0) {
        return Err(CliError::Usage(format!("alpha must be positive, got {}", opts.alpha)));
    }
    if opts.trials < 1 {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }
    opts.selector.validate()?;
    let active = matrix.all_cases();
    let eps = epsilons(matrix, &opts.selector);
    let exact = exact_for(matrix, opts, eps.as_deref())?;
    let plexicase = plexicase_distribution(matrix, &active, opts.alpha, eps.as_deref())?;
    let empirical = empirical_distribution(matrix, &active, &opts.selector, opts.trials, opts.seed)?;

    let tv = |a: &SelectionDistribution, b: &SelectionDistribution| total_variation(a, b);
    let (exact, exact_omitted) = match exact {
        Ok(d) => (Some(d), None),
        Err(reason) => (None, Some(reason)),
    };
    let total_variation = TotalVariation {
        exact_plexicase: exact.as_ref().map(|e| tv(e, &plexicase)).transpose()?,
        exact_empirical: exact.as_ref().map(|e| tv(e, &empirical)).transpose()?,
        plexicase_empirical: tv(&plexicase, &empirical)?,
    };
    let individuals = match matrix.individual_labels() {
        Some(l) => l.to_vec(),
        None => (0..matrix.n_individuals()).map(|i| format!("i{i}")).collect(),
    };
    Ok(ProbsReport {
        individuals,
        selector: opts.selector.variant,
        trials: opts.trials,
        alpha: opts.alpha,
        exact: exact.map(|d| d.probs().to_vec()),
        exact_omitted,
        plexicase: plexicase.probs().to_vec(),
        empirical: empirical.probs().to_vec(),
        total_variation,
    })
}
