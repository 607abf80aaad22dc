//! Selection timing on generated continuous-error matrices.

use std::convert::Infallible;
use std::hint::black_box;
use std::io::Write;
use std::time::Instant;

use lexicase_core::lazy::{lazy_lexicase_select, LazyEvaluator};
use lexicase_core::selectors::{SelectorConfig, Variant};
use lexicase_core::{ErrorMatrix, RandomSource};
use rand::Rng;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
#[clap(rename_all = "snake_case")]
pub enum BenchSelector {
    Lexicase,
    Epsilon,
    Batch,
    Weighted,
    Plexicase,
    Tournament,
    FitnessProportionate,
    UniformRandom,
    /// Lexicase through a memoizing lazy evaluator.
    LazyLexicase,
}

impl BenchSelector {
    pub fn name(self) -> &'static str {
        match self {
            BenchSelector::Lexicase => "lexicase",
            BenchSelector::Epsilon => "epsilon",
            BenchSelector::Batch => "batch",
            BenchSelector::Weighted => "weighted",
            BenchSelector::Plexicase => "plexicase",
            BenchSelector::Tournament => "tournament",
            BenchSelector::FitnessProportionate => "fitness_proportionate",
            BenchSelector::UniformRandom => "uniform_random",
            BenchSelector::LazyLexicase => "lazy_lexicase",
        }
    }

    fn variant(self) -> Option<Variant> {
        Some(match self {
            BenchSelector::Lexicase => Variant::Lexicase,
            BenchSelector::Epsilon => Variant::Epsilon,
            BenchSelector::Batch => Variant::Batch,
            BenchSelector::Weighted => Variant::Weighted,
            BenchSelector::Plexicase => Variant::Plexicase,
            BenchSelector::Tournament => Variant::Tournament,
            BenchSelector::FitnessProportionate => Variant::FitnessProportionate,
            BenchSelector::UniformRandom => Variant::UniformRandom,
            BenchSelector::LazyLexicase => return None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub sizes: Vec<(usize, usize)>,
    pub selectors: Vec<BenchSelector>,
    pub repetitions: usize,
    pub events: usize,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            sizes: vec![(1000, 200)],
            selectors: vec![
                BenchSelector::Lexicase,
                BenchSelector::Plexicase,
                BenchSelector::LazyLexicase,
            ],
            repetitions: 5,
            events: 1000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n_individuals: usize,
    pub n_cases: usize,
    pub selector: BenchSelector,
    pub median_ns: u64,
    pub speedup_vs_lexicase: f64,
    /// Error-matrix cells one selection event needs: the whole matrix for
    /// eager selectors, the mean number of cells filtered on for the lazy
    /// one.
    pub cells_evaluated: f64,
}

pub fn continuous_matrix(n: usize, m: usize, rng: &mut RandomSource) -> Result<ErrorMatrix> {
    Ok(ErrorMatrix::new(
        n,
        m,
        (0..n * m).map(|_| rng.random::<f64>()).collect(),
    )?)
}

fn median(mut xs: Vec<u64>) -> u64 {
    xs.sort_unstable();
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        (xs[k / 2 - 1] + xs[k / 2]) / 2
    }
}

/// `events` selections, from preparation to the last winner. Returns
/// elapsed nanoseconds and cells needed per event.
pub fn time_events(matrix: &ErrorMatrix, selector: BenchSelector, events: usize, seed: u64) -> Result<(u64, f64)> {
    let active = matrix.all_cases();
    let start = Instant::now();
    let mut acc = 0usize;
    let cells = match selector.variant() {
        Some(variant) => {
            let mut config = SelectorConfig::new(variant);
            config.batch_size = config.batch_size.min(active.len());
            let prepared = lexicase_core::selectors::Selector::prepare(matrix, &active, &config)?;
            for k in 0..events as u64 {
                acc ^= prepared.select(&mut RandomSource::stream(seed, k))?.winner;
            }
            (matrix.n_individuals() * matrix.n_cases()) as f64
        }
        None => {
            let mut ev = LazyEvaluator::new(matrix.n_individuals(), matrix.n_cases(), |i, c| {
                Ok::<_, Infallible>(matrix.get(i, c))
            })?;
            for k in 0..events as u64 {
                acc ^= lazy_lexicase_select(&mut ev, &active, None, &mut RandomSource::stream(seed, k))?.winner;
            }
            // Each event requests every cell it filters on exactly once.
            ev.cells_requested() as f64 / events as f64
        }
    };
    black_box(acc);
    Ok((start.elapsed().as_nanos() as u64, cells))
}

pub fn cmd_bench(opts: &BenchOptions) -> Result<Vec<BenchRow>> {
    if opts.repetitions < 3 {
        return Err(CliError::Usage("repetitions must be at least 3".into()));
    }
    if opts.events < 1 || opts.sizes.is_empty() || opts.selectors.is_empty() {
        return Err(CliError::Usage(
            "bench needs sizes, selectors and at least one event".into(),
        ));
    }
    if let Some(&(n, m)) = opts.sizes.iter().find(|&&(n, m)| n < 1 || m < 1) {
        return Err(CliError::Usage(format!("invalid size {n}x{m}")));
    }
    let mut rows = Vec::new();
    for (cell, &(n, m)) in opts.sizes.iter().enumerate() {
        let matrix = continuous_matrix(n, m, &mut RandomSource::stream(opts.seed, cell as u64))?;
        let event_seed = RandomSource::stream_seed(opts.seed, (cell as u64) | 1 << 32);
        let measure = |s: BenchSelector| -> Result<(u64, f64)> {
            let mut times = Vec::with_capacity(opts.repetitions);
            let mut cells = 0.0;
            for _ in 0..opts.repetitions {
                let (t, c) = time_events(&matrix, s, opts.events, event_seed)?;
                times.push(t);
                cells = c;
            }
            Ok((median(times), cells))
        };
        let (baseline, _) = measure(BenchSelector::Lexicase)?;
        for &s in &opts.selectors {
            let (median_ns, cells_evaluated) = measure(s)?;
            rows.push(BenchRow {
                n_individuals: n,
                n_cases: m,
                selector: s,
                median_ns,
                speedup_vs_lexicase: baseline as f64 / median_ns.max(1) as f64,
                cells_evaluated,
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n_individuals",
        "n_cases",
        "selector",
        "median_ns",
        "speedup_vs_lexicase",
        "cells_evaluated",
    ])?;
    for r in rows {
        w.write_record([
            r.n_individuals.to_string(),
            r.n_cases.to_string(),
            r.selector.name().to_string(),
            r.median_ns.to_string(),
            r.speedup_vs_lexicase.to_string(),
            r.cells_evaluated.to_string(),
        ])?;
    }
    w.flush()
}
