//! Seed sweeps over experiment configurations.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lexicase_core::evolve::{run_evolution_timed, NoClock, RunRecord, Stopwatch};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::CliConfig;
use crate::error::{CliError, Result};

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    /// Replaces every experiment's seed.
    pub seed: Option<u64>,
    pub jobs: usize,
    /// Replaces the configured output directory.
    pub output: Option<PathBuf>,
    /// Record wall time spent in selection per generation.
    pub timings: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            seed: None,
            jobs: 1,
            output: None,
            timings: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub runs: usize,
    pub seeds: Vec<u64>,
    pub successes: usize,
    pub generalizations: usize,
    /// Over successful runs.
    pub mean_generations_to_solution: Option<f64>,
    /// Summed over runs.
    pub total_evaluations: u64,
    /// Mean over runs of each run's mean per-generation diversity.
    pub mean_behavioral_diversity: f64,
}

struct WallClock(Instant);

impl Stopwatch for WallClock {
    fn now_ns(&mut self) -> Option<u64> {
        Some(self.0.elapsed().as_nanos() as u64)
    }
}

pub fn summarize(name: &str, seeds: &[u64], records: &[RunRecord]) -> Summary {
    let solved: Vec<usize> = records.iter().filter_map(|r| r.solution_generation).collect();
    let diversity = |r: &RunRecord| {
        r.generations.iter().map(|g| g.behavioral_diversity as f64).sum::<f64>() / r.generations.len() as f64
    };
    Summary {
        name: name.to_string(),
        runs: records.len(),
        seeds: seeds.to_vec(),
        successes: records.iter().filter(|r| r.success).count(),
        generalizations: records.iter().filter(|r| r.generalization).count(),
        mean_generations_to_solution: (!solved.is_empty())
            .then(|| solved.iter().sum::<usize>() as f64 / solved.len() as f64),
        total_evaluations: records.iter().map(|r| r.total_evaluations).sum(),
        mean_behavioral_diversity: records.iter().map(diversity).sum::<f64>() / records.len() as f64,
    }
}

/// Runs every experiment `config.runs` times, `jobs` runs at a time, and
/// returns the records grouped by experiment in seed order.
pub fn run_all(config: &CliConfig, opts: &EvolveOptions) -> Result<Vec<(Vec<u64>, Vec<RunRecord>)>> {
    if opts.jobs < 1 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let tasks: Vec<(usize, u64)> = config
        .experiments
        .iter()
        .enumerate()
        .flat_map(|(e, exp)| {
            let base = opts.seed.unwrap_or(exp.config.seed);
            (0..config.runs as u64).map(move |r| (e, base.wrapping_add(r)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} worker threads: {e}", opts.jobs)))?;
    let results: Vec<lexicase_core::Result<RunRecord>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(e, seed)| {
                let mut run = config.experiments[e].config.clone();
                run.seed = seed;
                if opts.timings {
                    run_evolution_timed(&run, &mut WallClock(Instant::now()))
                } else {
                    run_evolution_timed(&run, &mut NoClock)
                }
            })
            .collect()
    });

    let mut grouped: Vec<(Vec<u64>, Vec<RunRecord>)> = vec![(Vec::new(), Vec::new()); config.experiments.len()];
    for (&(e, seed), record) in tasks.iter().zip(results) {
        grouped[e].0.push(seed);
        grouped[e].1.push(record?);
    }
    Ok(grouped)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(CliError::io(path))?;
    f.write_all(bytes).map_err(CliError::io(path))
}

/// Runs the sweep and writes `<output>/<experiment>/run_<seed>.jsonl` plus
/// `<output>/<experiment>/summary.json`.
pub fn cmd_evolve(config: &CliConfig, opts: &EvolveOptions) -> Result<Vec<Summary>> {
    let out = opts
        .output
        .clone()
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let grouped = run_all(config, opts)?;
    let mut summaries = Vec::new();
    for (exp, (seeds, records)) in config.experiments.iter().zip(&grouped) {
        let dir = out.join(&exp.name);
        std::fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;
        for (seed, record) in seeds.iter().zip(records) {
            let mut line = serde_json::to_string(record).expect("records serialize");
            line.push('\n');
            write_file(&dir.join(format!("run_{seed}.jsonl")), line.as_bytes())?;
        }
        let summary = summarize(&exp.name, seeds, records);
        let mut text = serde_json::to_string_pretty(&summary).expect("summaries serialize");
        text.push('\n');
        write_file(&dir.join("summary.json"), text.as_bytes())?;
        summaries.push(summary);
    }
    Ok(summaries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> CliConfig {
        CliConfig::parse(
            r#"{"runs": 3, "experiments": [
                {"name": "lex", "config": {"problem": "parity4", "population_size": 30, "max_generations": 3}},
                {"name": "tour", "config": {"problem": "parity4", "population_size": 30, "max_generations": 3,
                    "selector": {"variant": "tournament"}}}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn job_count_does_not_change_results() {
        let c = config();
        let one = run_all(&c, &EvolveOptions::default()).unwrap();
        let four = run_all(
            &c,
            &EvolveOptions {
                jobs: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(one, four);
        assert_eq!(one[0].0, vec![0, 1, 2]);
    }

    #[test]
    fn timings_are_opt_in() {
        let c = config();
        let plain = run_all(&c, &EvolveOptions::default()).unwrap();
        assert!(plain[0].1[0].generations.iter().all(|g| g.selection_time_ns.is_none()));
        let timed = run_all(
            &c,
            &EvolveOptions {
                timings: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(timed[0].1[0].generations[0].selection_time_ns.is_some());
    }

    #[test]
    fn summary_arithmetic() {
        let c = config();
        let (seeds, records) = &run_all(&c, &EvolveOptions::default()).unwrap()[0];
        let s = summarize("lex", seeds, records);
        assert_eq!(s.runs, 3);
        assert_eq!(
            s.total_evaluations,
            records.iter().map(|r| r.total_evaluations).sum::<u64>()
        );
        assert!(s.mean_behavioral_diversity >= 1.0);
    }
}
