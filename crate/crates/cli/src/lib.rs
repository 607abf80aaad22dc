//! Command-line experiments for lexicase-family selection: selection
//! distributions of error matrices, evolutionary seed sweeps, selection
//! timing and informed downsampling.

pub mod bench;
pub mod config;
pub mod downsample;
pub mod error;
pub mod evolve;
pub mod matrix_csv;
pub mod probs;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lexicase_core::probability::ExactOptions;
use lexicase_core::selectors::{EpsilonSource, SelectorConfig, Variant, WeightMetric};

pub use error::{CliError, Result};

const EXIT_HELP: &str = "\
Exit status:
  0  success
  1  evaluation failure or internal error
  2  usage error (bad flags or arguments)
  3  parse or schema error (malformed matrix CSV, invalid configuration)
  4  resource limit exceeded
  5  file system error";

#[derive(Debug, Parser)]
#[command(name = "lexicase", version, about, after_help = EXIT_HELP)]
pub struct Cli {
    /// Seed for every random choice [default: 0, or the configured seed for evolve].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for evolve.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Output file (probs, bench, downsample) or directory (evolve); stdout
    /// when omitted, except for evolve.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact, plexicase and empirical selection distributions of a matrix, as JSON.
    Probs(ProbsArgs),
    /// Run the experiments of a JSON configuration and write run records.
    Evolve(EvolveArgs),
    /// Time selection events and write a CSV table.
    Bench(BenchArgs),
    /// Solve summary, case distances and an informed downsample, as JSON.
    Downsample(DownsampleArgs),
}

#[derive(Debug, Args)]
pub struct SelectorArgs {
    /// lexicase, epsilon, batch, weighted, plexicase, tournament,
    /// fitness_proportionate or uniform_random.
    #[arg(long, default_value = "lexicase", value_parser = parse_variant)]
    pub selector: Variant,
    /// mad, zero, or a fixed value.
    #[arg(long, default_value = "mad", value_parser = parse_epsilon)]
    pub epsilon: EpsilonSource,
    #[arg(long, default_value_t = 2)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 2)]
    pub tournament_size: usize,
    /// uniform or failure_rate.
    #[arg(long, default_value = "uniform", value_parser = parse_weights)]
    pub weights: WeightMetric,
}

impl SelectorArgs {
    fn config(&self, alpha: f64) -> SelectorConfig {
        SelectorConfig {
            variant: self.selector,
            epsilon: self.epsilon.clone(),
            batch_size: self.batch_size,
            weights: self.weights.clone(),
            tournament_size: self.tournament_size,
            alpha,
        }
    }
}

#[derive(Debug, Args)]
pub struct ProbsArgs {
    /// Error matrix CSV.
    pub matrix: PathBuf,
    #[command(flatten)]
    pub selector: SelectorArgs,
    /// Selection events for the empirical distribution.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Plexicase pressure exponent.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Lift the exact oracle's 12-row / 10-case guard (64 / 64 still applies).
    #[arg(long)]
    pub no_guard: bool,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// JSON configuration.
    pub config: PathBuf,
    /// Record per-generation selection wall time in the run records.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated `<individuals>x<cases>` grid.
    #[arg(long, default_value = "1000x200", value_delimiter = ',', value_parser = parse_size)]
    pub sizes: Vec<(usize, usize)>,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "lexicase,plexicase,lazy_lexicase"
    )]
    pub selectors: Vec<bench::BenchSelector>,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    /// Selection events per repetition.
    #[arg(long, default_value_t = 1000)]
    pub events: usize,
}

#[derive(Debug, Args)]
#[group(id = "sample", required = true, args = ["size", "rate"])]
pub struct DownsampleArgs {
    /// Error matrix CSV.
    pub matrix: PathBuf,
    /// Errors at or below this count as solved; required for real-valued errors.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Number of cases to sample.
    #[arg(long)]
    pub size: Option<usize>,
    /// Fraction of cases to sample.
    #[arg(long)]
    pub rate: Option<f64>,
}

fn from_name<T: serde::de::DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    from_name(s)
}

fn parse_weights(s: &str) -> std::result::Result<WeightMetric, String> {
    from_name(s)
}

fn parse_epsilon(s: &str) -> std::result::Result<EpsilonSource, String> {
    match s {
        "mad" => Ok(EpsilonSource::Mad),
        "zero" => Ok(EpsilonSource::Zero),
        _ => s
            .parse::<f64>()
            .map(EpsilonSource::Fixed)
            .map_err(|_| format!("expected mad, zero or a number, got `{s}`")),
    }
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (n, m) = s
        .split_once('x')
        .ok_or_else(|| format!("expected <individuals>x<cases>, got `{s}`"))?;
    let n = n.parse().map_err(|e| format!("`{n}`: {e}"))?;
    let m = m.parse().map_err(|e| format!("`{m}`: {e}"))?;
    Ok((n, m))
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, bytes).map_err(CliError::io(path)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|()| out.flush())
                .map_err(CliError::io("<stdout>"))
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text.into_bytes()
}

pub fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    if cli.jobs < 1 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    match cli.command {
        Command::Probs(args) => {
            let matrix = matrix_csv::read_matrix(&args.matrix)?;
            let opts = probs::ProbsOptions {
                selector: args.selector.config(args.alpha),
                trials: args.trials,
                alpha: args.alpha,
                seed,
                exact: ExactOptions {
                    override_guard: args.no_guard,
                    ..ExactOptions::default()
                },
            };
            let report = probs::cmd_probs(&matrix, &opts)?;
            if let Some(reason) = &report.exact_omitted {
                eprintln!("warning: exact distribution omitted: {reason}");
            }
            emit(cli.output.as_deref(), &json(&report))
        }
        Command::Evolve(args) => {
            let config = config::CliConfig::load(&args.config)?;
            let opts = evolve::EvolveOptions {
                seed: cli.seed,
                jobs: cli.jobs,
                output: cli.output,
                timings: args.timings,
            };
            let summaries = evolve::cmd_evolve(&config, &opts)?;
            emit(None, &json(&summaries))
        }
        Command::Bench(args) => {
            let opts = bench::BenchOptions {
                sizes: args.sizes,
                selectors: args.selectors,
                repetitions: args.repetitions,
                events: args.events,
                seed,
            };
            let rows = bench::cmd_bench(&opts)?;
            let mut buf = Vec::new();
            bench::write_csv(&rows, &mut buf).map_err(CliError::io("<buffer>"))?;
            emit(cli.output.as_deref(), &buf)
        }
        Command::Downsample(args) => {
            let matrix = matrix_csv::read_matrix(&args.matrix)?;
            let size = match (args.size, args.rate) {
                (Some(k), _) => downsample::SampleSize::Cases(k),
                (None, Some(r)) => downsample::SampleSize::Rate(r),
                (None, None) => return Err(CliError::Usage("one of --size or --rate is required".into())),
            };
            let opts = downsample::DownsampleOptions {
                threshold: args.threshold,
                size,
                seed,
            };
            emit(
                cli.output.as_deref(),
                &json(&downsample::cmd_downsample(&matrix, &opts)?),
            )
        }
    }
}
