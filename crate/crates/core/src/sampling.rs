//! Downsampling of the training cases.
//!
//! * Random downsampling draws a fresh uniform subset each generation.
//! * Informed downsampling evaluates a sample of parents on every case,
//!   records which cases each parent solves ([`SolveMatrix`]), and builds the
//!   downsample by farthest-first traversal under the normalized Hamming
//!   distance between case columns. Cases solved by the same parents are
//!   distance 0 apart and are not picked together while other groups remain.

use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use crate::error::{usage, Result};
use crate::matrix::ErrorMatrix;
use crate::rng::RandomSource;

/// Pass/fail record of sampled parents (rows) over all training cases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveMatrix {
    n_rows: usize,
    n_cases: usize,
    solved: Vec<bool>,
}

impl SolveMatrix {
    pub fn new(n_rows: usize, n_cases: usize, solved: Vec<bool>) -> Result<Self> {
        if n_rows == 0 || n_cases == 0 {
            return Err(usage!("solve matrix needs at least one row and one case"));
        }
        if solved.len() != n_rows * n_cases {
            return Err(usage!(
                "expected {} solve entries for {n_rows}x{n_cases}, got {}",
                n_rows * n_cases,
                solved.len()
            ));
        }
        Ok(Self {
            n_rows,
            n_cases,
            solved,
        })
    }

    /// Builds from per-case columns (each of length `n_rows`).
    pub fn from_columns(columns: &[&[bool]]) -> Result<Self> {
        let n_cases = columns.len();
        let n_rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != n_rows) {
            return Err(usage!("solve columns have different lengths"));
        }
        let mut solved = Vec::with_capacity(n_rows * n_cases);
        for r in 0..n_rows {
            solved.extend(columns.iter().map(|c| c[r]));
        }
        Self::new(n_rows, n_cases, solved)
    }

    /// `solved(p, c)` iff `e(p, c) <= threshold`, for the given rows.
    pub fn from_errors(matrix: &ErrorMatrix, rows: &[usize], threshold: f64) -> Result<Self> {
        if threshold.is_nan() || threshold < 0.0 {
            return Err(usage!("solve threshold must be nonnegative, got {threshold}"));
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= matrix.n_individuals()) {
            return Err(usage!(
                "row {r} out of range for {} individuals",
                matrix.n_individuals()
            ));
        }
        let solved = rows
            .iter()
            .flat_map(|&r| matrix.row(r).iter().map(move |&e| e <= threshold))
            .collect();
        Self::new(rows.len(), matrix.n_cases(), solved)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cases(&self) -> usize {
        self.n_cases
    }

    pub fn solved(&self, row: usize, case: usize) -> bool {
        self.solved[row * self.n_cases + case]
    }

    /// Number of sampled parents solving each case.
    pub fn pass_counts(&self) -> Vec<usize> {
        (0..self.n_cases)
            .map(|c| (0..self.n_rows).filter(|&r| self.solved(r, c)).count())
            .collect()
    }

    fn distance_unchecked(&self, a: usize, b: usize) -> f64 {
        let differing = (0..self.n_rows)
            .filter(|&r| self.solved(r, a) != self.solved(r, b))
            .count();
        differing as f64 / self.n_rows as f64
    }
}

/// Fraction of sampled parents whose pass/fail differs between cases `a`
/// and `b`.
pub fn case_distance(solves: &SolveMatrix, a: usize, b: usize) -> Result<f64> {
    for c in [a, b] {
        if c >= solves.n_cases {
            return Err(usage!("case index {c} out of range for {} cases", solves.n_cases));
        }
    }
    Ok(solves.distance_unchecked(a, b))
}

/// `max(1, round_half_up(rate * n))`.
pub fn sample_size(rate: f64, n: usize) -> usize {
    (libm::floor(rate * n as f64 + 0.5) as usize).clamp(1, n.max(1))
}

fn check_rate(name: &str, rate: f64) -> Result<()> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(usage!("{name} must be in (0, 1], got {rate}"));
    }
    Ok(())
}

/// A uniform subset of `0..n_cases` of size `max(1, round(rate * n_cases))`,
/// sorted ascending.
pub fn random_downsample(n_cases: usize, rate: f64, rng: &mut RandomSource) -> Result<Vec<usize>> {
    check_rate("downsample rate", rate)?;
    if n_cases == 0 {
        return Err(usage!("no cases to sample from"));
    }
    let mut picked = index::sample(rng, n_cases, sample_size(rate, n_cases)).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Farthest-first downsample of `size` cases, starting from a uniformly
/// drawn case. Returned in selection order.
pub fn informed_downsample(solves: &SolveMatrix, size: usize, rng: &mut RandomSource) -> Result<Vec<usize>> {
    check_size(solves, size)?;
    let start = rng.random_range(0..solves.n_cases);
    farthest_first(solves, size, start, rng)
}

/// [`informed_downsample`] with a fixed starting case.
pub fn informed_downsample_from(
    solves: &SolveMatrix,
    size: usize,
    start: usize,
    rng: &mut RandomSource,
) -> Result<Vec<usize>> {
    check_size(solves, size)?;
    if start >= solves.n_cases {
        return Err(usage!("start case {start} out of range for {} cases", solves.n_cases));
    }
    farthest_first(solves, size, start, rng)
}

fn check_size(solves: &SolveMatrix, size: usize) -> Result<()> {
    if size < 1 || size > solves.n_cases {
        return Err(usage!("downsample size must be in 1..={}, got {size}", solves.n_cases));
    }
    Ok(())
}

fn farthest_first(solves: &SolveMatrix, size: usize, start: usize, rng: &mut RandomSource) -> Result<Vec<usize>> {
    let n = solves.n_cases;
    let mut chosen = Vec::with_capacity(size);
    let mut taken = alloc::vec![false; n];
    // Distance from each case to its nearest chosen case.
    let mut nearest = alloc::vec![f64::INFINITY; n];
    let mut ties = Vec::new();
    let mut next = start;
    loop {
        chosen.push(next);
        taken[next] = true;
        if chosen.len() == size {
            return Ok(chosen);
        }
        for (o, d) in nearest.iter_mut().enumerate() {
            *d = d.min(solves.distance_unchecked(next, o));
        }
        let best = (0..n)
            .filter(|&c| !taken[c])
            .map(|c| nearest[c])
            .fold(f64::NEG_INFINITY, f64::max);
        ties.clear();
        ties.extend((0..n).filter(|&c| !taken[c] && nearest[c] == best));
        next = ties[rng.random_range(0..ties.len())];
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DownsampleMode {
    #[default]
    Full,
    Random,
    Informed,
}

/// Downsampling policy.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct DownsampleSchedule {
    pub mode: DownsampleMode,
    /// Fraction of the training cases in each downsample.
    pub ds_rate: f64,
    /// Fraction of the population evaluated on every case to build the
    /// solve matrix (informed mode).
    pub parent_rate: f64,
    /// Generations between solve-matrix rebuilds (informed mode).
    pub generational_interval: usize,
    /// Errors at or below this count as solved.
    pub solve_threshold: f64,
}

impl Default for DownsampleSchedule {
    fn default() -> Self {
        Self {
            mode: DownsampleMode::Full,
            ds_rate: 1.0,
            parent_rate: 0.01,
            generational_interval: 1,
            solve_threshold: 0.0,
        }
    }
}

impl DownsampleSchedule {
    pub fn full() -> Self {
        Self::default()
    }

    pub fn random(ds_rate: f64) -> Self {
        Self {
            mode: DownsampleMode::Random,
            ds_rate,
            ..Self::default()
        }
    }

    pub fn informed(ds_rate: f64, parent_rate: f64, generational_interval: usize) -> Self {
        Self {
            mode: DownsampleMode::Informed,
            ds_rate,
            parent_rate,
            generational_interval,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_rate("ds_rate", self.ds_rate)?;
        check_rate("parent_rate", self.parent_rate)?;
        if self.generational_interval < 1 {
            return Err(usage!("generational_interval must be at least 1"));
        }
        if !(self.solve_threshold >= 0.0 && self.solve_threshold.is_finite()) {
            return Err(usage!("solve_threshold must be finite and nonnegative"));
        }
        Ok(())
    }

    /// Size of the active case set this schedule produces.
    pub fn active_size(&self, n_cases: usize) -> usize {
        match self.mode {
            DownsampleMode::Full => n_cases,
            _ => sample_size(self.ds_rate, n_cases),
        }
    }
}

/// Evaluations charged for one generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct CostRecord {
    /// Population evaluated on the active cases: `n_individuals * |active|`.
    pub population_evaluations: u64,
    /// Sampled parents evaluated on every case to rebuild the solve matrix.
    pub estimation_evaluations: u64,
    /// Whether the solve matrix was rebuilt this generation.
    pub estimated: bool,
}

impl CostRecord {
    pub fn total(&self) -> u64 {
        self.population_evaluations + self.estimation_evaluations
    }
}

/// Applies a [`DownsampleSchedule`] generation by generation; keeps the
/// informed downsample between rebuilds.
#[derive(Clone, Debug)]
pub struct Downsampler {
    schedule: DownsampleSchedule,
    stored: Option<Vec<usize>>,
}

/// Output of [`Downsampler::step`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleStep {
    pub active: Vec<usize>,
    pub cost: CostRecord,
    /// The rebuilt solve matrix, on estimation generations.
    pub solves: Option<SolveMatrix>,
}

impl Downsampler {
    pub fn new(schedule: DownsampleSchedule) -> Result<Self> {
        schedule.validate()?;
        Ok(Self { schedule, stored: None })
    }

    pub fn schedule(&self) -> &DownsampleSchedule {
        &self.schedule
    }

    /// Chooses the active cases for `generation`.
    ///
    /// In informed mode, on generations where `generation % interval == 0`
    /// (and on the first call), `estimate` receives a uniformly drawn sample
    /// of `max(1, round(parent_rate * n_individuals))` population indices and
    /// must return their solve matrix over all `n_cases` cases.
    pub fn step<F>(
        &mut self,
        generation: usize,
        n_individuals: usize,
        n_cases: usize,
        mut estimate: F,
        rng: &mut RandomSource,
    ) -> Result<ScheduleStep>
    where
        F: FnMut(&[usize]) -> Result<SolveMatrix>,
    {
        if n_individuals == 0 || n_cases == 0 {
            return Err(usage!("schedule step needs a nonempty population and case set"));
        }
        let s = &self.schedule;
        let mut cost = CostRecord::default();
        let mut solves = None;
        let active = match s.mode {
            DownsampleMode::Full => (0..n_cases).collect(),
            DownsampleMode::Random => random_downsample(n_cases, s.ds_rate, rng)?,
            DownsampleMode::Informed => {
                if self.stored.is_none() || generation.is_multiple_of(s.generational_interval) {
                    let n_parents = sample_size(s.parent_rate, n_individuals);
                    let mut parents = index::sample(rng, n_individuals, n_parents).into_vec();
                    parents.sort_unstable();
                    let m = estimate(&parents)?;
                    if m.n_rows() != parents.len() || m.n_cases() != n_cases {
                        return Err(usage!(
                            "estimator returned a {}x{} solve matrix, expected {}x{n_cases}",
                            m.n_rows(),
                            m.n_cases(),
                            parents.len()
                        ));
                    }
                    cost.estimation_evaluations = (n_parents * n_cases) as u64;
                    cost.estimated = true;
                    let mut sample = informed_downsample(&m, sample_size(s.ds_rate, n_cases), rng)?;
                    sample.sort_unstable();
                    self.stored = Some(sample);
                    solves = Some(m);
                }
                self.stored.clone().unwrap_or_default()
            }
        };
        cost.population_evaluations = (n_individuals * active.len()) as u64;
        Ok(ScheduleStep { active, cost, solves })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn abcd() -> SolveMatrix {
        let a = [true, false, true, false];
        let b = [false, true, false, true];
        let d = [true, true, true, true];
        SolveMatrix::from_columns(&[&a, &b, &a, &d]).unwrap()
    }

    #[test]
    fn distances() {
        let m = abcd();
        assert_eq!(case_distance(&m, 0, 2).unwrap(), 0.0);
        assert_eq!(case_distance(&m, 0, 1).unwrap(), 1.0);
        assert_eq!(case_distance(&m, 0, 3).unwrap(), 0.5);
        assert!(case_distance(&m, 0, 4).is_err());
    }

    #[test]
    fn farthest_first_examples() {
        let m = abcd();
        let mut rng = RandomSource::new(0);
        assert_eq!(informed_downsample_from(&m, 2, 0, &mut rng).unwrap(), vec![0, 1]);
        for seed in 0..50 {
            let mut rng = RandomSource::new(seed);
            assert_eq!(informed_downsample_from(&m, 3, 0, &mut rng).unwrap(), vec![0, 1, 3]);
            let mut all = informed_downsample(&m, 4, &mut rng).unwrap();
            all.sort_unstable();
            assert_eq!(all, vec![0, 1, 2, 3]);
        }
        assert!(informed_downsample(&m, 0, &mut rng).is_err());
        assert!(informed_downsample(&m, 5, &mut rng).is_err());
    }

    #[test]
    fn sizes_round_half_up_with_floor() {
        assert_eq!(sample_size(0.1, 200), 20);
        assert_eq!(sample_size(0.01, 5), 1);
        assert_eq!(sample_size(0.5, 5), 3);
        assert_eq!(sample_size(1.0, 7), 7);
        assert_eq!(sample_size(0.01, 100), 1);
    }

    #[test]
    fn random_downsample_sizes() {
        let mut rng = RandomSource::new(3);
        assert_eq!(
            random_downsample(10, 1.0, &mut rng).unwrap(),
            (0..10).collect::<Vec<_>>()
        );
        assert_eq!(random_downsample(200, 0.1, &mut rng).unwrap().len(), 20);
        assert_eq!(random_downsample(5, 0.01, &mut rng).unwrap().len(), 1);
        assert!(random_downsample(5, 0.0, &mut rng).is_err());
        assert!(random_downsample(5, 1.5, &mut rng).is_err());
    }

    #[test]
    fn solve_matrix_from_errors() {
        let m = ErrorMatrix::from_rows(&[[0.0, 0.5, 2.0], [1.0, 0.0, 0.0]]).unwrap();
        let s = SolveMatrix::from_errors(&m, &[1, 0], 0.5).unwrap();
        assert!(s.solved(0, 1) && s.solved(0, 2) && !s.solved(0, 0));
        assert!(s.solved(1, 0) && s.solved(1, 1) && !s.solved(1, 2));
        assert_eq!(s.pass_counts(), vec![1, 2, 1]);
    }

    #[test]
    fn full_and_random_costs() {
        let mut rng = RandomSource::new(1);
        let mut full = Downsampler::new(DownsampleSchedule::full()).unwrap();
        let no_estimate = |_: &[usize]| -> Result<SolveMatrix> { unreachable!() };
        let s = full.step(0, 100, 200, no_estimate, &mut rng).unwrap();
        assert_eq!(s.cost.total(), 20_000);
        let mut rnd = Downsampler::new(DownsampleSchedule::random(0.1)).unwrap();
        for g in 0..5 {
            let s = rnd.step(g, 100, 200, no_estimate, &mut rng).unwrap();
            assert_eq!(s.cost.population_evaluations, 2_000);
            assert_eq!(s.cost.estimation_evaluations, 0);
        }
    }

    #[test]
    fn informed_rebuilds_on_interval() {
        let mut rng = RandomSource::new(1);
        let mut ds = Downsampler::new(DownsampleSchedule::informed(0.1, 0.01, 3)).unwrap();
        let mut calls = vec![];
        for g in 0..7 {
            let s = ds
                .step(
                    g,
                    100,
                    20,
                    |parents| {
                        calls.push((g, parents.len()));
                        SolveMatrix::new(parents.len(), 20, vec![false; parents.len() * 20])
                    },
                    &mut rng,
                )
                .unwrap();
            assert_eq!(s.active.len(), 2);
            let expected = if g % 3 == 0 { 20 } else { 0 };
            assert_eq!(s.cost.estimation_evaluations, expected);
            assert_eq!(s.cost.population_evaluations, 200);
        }
        assert_eq!(calls, vec![(0, 1), (3, 1), (6, 1)]);
    }

    #[test]
    fn interval_one_rebuilds_every_generation() {
        let mut rng = RandomSource::new(1);
        let mut ds = Downsampler::new(DownsampleSchedule::informed(0.5, 0.1, 1)).unwrap();
        for g in 0..4 {
            let s = ds
                .step(
                    g,
                    10,
                    4,
                    |p| SolveMatrix::new(p.len(), 4, vec![true; p.len() * 4]),
                    &mut rng,
                )
                .unwrap();
            assert!(s.cost.estimated);
            assert!(s.solves.is_some());
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(DownsampleSchedule::random(0.0).validate().is_err());
        assert!(DownsampleSchedule::informed(0.1, 1.1, 1).validate().is_err());
        assert!(DownsampleSchedule::informed(0.1, 0.1, 0).validate().is_err());
    }
}
