//! Selection-probability distributions.
//!
//! [`exact_distribution`] evaluates the lexicase recursion
//!
//! ```text
//! D(pool, R) = uniform(pool)                               if R is empty or |pool| = 1
//! D(pool, R) = 1/|R| * sum over c in R of D(filter(pool, c), R \ {c})
//! ```
//!
//! over distinct error vectors, memoized on `(pool, R)` bitmasks. Its cost is
//! exponential, so it is guarded to small instances. [`plexicase_distribution`]
//! is a one-pass approximation with a pressure exponent.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

use crate::elite::{check_epsilons, widened_epsilons};
use crate::error::{usage, Error, Result};
use crate::matrix::ErrorMatrix;
use crate::rng::RandomSource;
use crate::selectors::{Selector, SelectorConfig, Variant};

/// Probabilities over the individuals of a matrix. Entries are nonnegative
/// and sum to 1 within `1e-9`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct SelectionDistribution {
    probs: Vec<f64>,
}

impl SelectionDistribution {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(usage!("a distribution needs at least one entry"));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(usage!("probability {p} is not a finite nonnegative number"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(usage!("probabilities sum to {sum}, not 1"));
        }
        Ok(Self { probs })
    }

    /// Normalized selection counts.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(usage!("no counts to normalize"));
        }
        Self::new(counts.iter().map(|&c| c as f64 / total as f64).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    /// Indices with nonzero probability.
    pub fn support(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn sampler(&self) -> CdfSampler {
        CdfSampler::from_normalized(&self.probs)
    }
}

/// Inverse-CDF sampler with binary search.
#[derive(Clone, Debug)]
pub struct CdfSampler {
    cdf: Vec<f64>,
    last_positive: usize,
}

impl CdfSampler {
    /// From nonnegative weights with a positive sum.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(usage!("sampling weight {w} is not a finite nonnegative number"));
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return Err(usage!("sampling weights are all zero"));
        }
        Ok(Self::from_normalized(weights))
    }

    fn from_normalized(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let last_positive = weights.iter().rposition(|w| *w > 0.0).unwrap_or(0);
        Self { cdf, last_positive }
    }

    pub fn sample(&self, rng: &mut RandomSource) -> usize {
        let total = *self.cdf.last().unwrap_or(&0.0);
        let u = rng.random::<f64>() * total;
        // First index whose cumulative mass exceeds u; zero-mass entries are
        // never returned.
        self.cdf.partition_point(|&c| c <= u).min(self.last_positive)
    }
}

/// Draws an index with `P(i) = probs[i]`.
pub fn sample_index(dist: &SelectionDistribution, rng: &mut RandomSource) -> usize {
    dist.sampler().sample(rng)
}

/// `1/2 * sum |a_i - b_i|`.
pub fn total_variation(a: &SelectionDistribution, b: &SelectionDistribution) -> Result<f64> {
    if a.len() != b.len() {
        return Err(usage!(
            "distributions have different lengths ({} vs {})",
            a.len(),
            b.len()
        ));
    }
    Ok(0.5 * a.probs.iter().zip(&b.probs).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// Size guard and switches for [`exact_distribution_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactOptions {
    pub max_distinct_rows: usize,
    pub max_cases: usize,
    /// Ignore `max_distinct_rows` / `max_cases`. Instances are still limited
    /// to 64 distinct rows and 64 cases by the bitmask representation.
    pub override_guard: bool,
    /// Drop cases that leave the current pool unchanged before branching.
    pub skip_identity_cases: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            max_distinct_rows: 12,
            max_cases: 10,
            override_guard: false,
            skip_identity_cases: true,
        }
    }
}

/// Rows of a matrix projected on the active cases, grouped into distinct
/// vectors.
struct Projection {
    /// `values[v][k]`: error of distinct vector `v` on the k-th active case.
    values: Vec<Vec<f64>>,
    multiplicity: Vec<usize>,
    group_of: Vec<usize>,
}

fn project(matrix: &ErrorMatrix, active: &[usize]) -> Projection {
    let mut index: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut values = Vec::new();
    let mut multiplicity = Vec::new();
    let mut group_of = Vec::with_capacity(matrix.n_individuals());
    for row in matrix.rows() {
        let projected: Vec<f64> = active.iter().map(|&c| row[c]).collect();
        let key = projected
            .iter()
            .map(|v| if *v == 0.0 { 0 } else { v.to_bits() })
            .collect();
        let next = values.len();
        let g = *index.entry(key).or_insert(next);
        if g == next {
            values.push(projected);
            multiplicity.push(0);
        }
        multiplicity[g] += 1;
        group_of.push(g);
    }
    Projection {
        values,
        multiplicity,
        group_of,
    }
}

impl Projection {
    fn expand(&self, by_vector: &[f64]) -> Vec<f64> {
        self.group_of
            .iter()
            .map(|&g| by_vector[g] / self.multiplicity[g] as f64)
            .collect()
    }
}

/// Exact lexicase (or epsilon lexicase) selection probabilities, with the
/// default guard of 12 distinct rows and 10 active cases. Epsilons are
/// widened as in [`widened_epsilons`](crate::elite::widened_epsilons).
pub fn exact_distribution(
    matrix: &ErrorMatrix,
    active: &[usize],
    epsilons: Option<&[f64]>,
) -> Result<SelectionDistribution> {
    exact_distribution_with(matrix, active, epsilons, &ExactOptions::default())
}

pub fn exact_distribution_with(
    matrix: &ErrorMatrix,
    active: &[usize],
    epsilons: Option<&[f64]>,
    options: &ExactOptions,
) -> Result<SelectionDistribution> {
    matrix.check_active(active)?;
    if let Some(e) = epsilons {
        check_epsilons(matrix, e)?;
    }
    let proj = project(matrix, active);
    let d = proj.values.len();
    let (max_rows, max_cases) = if options.override_guard {
        (64, 64)
    } else {
        (options.max_distinct_rows.min(64), options.max_cases.min(64))
    };
    if d > max_rows || active.len() > max_cases {
        return Err(Error::Resource(alloc::format!(
            "exact oracle limited to {max_rows} distinct rows and {max_cases} cases, got {d} and {}",
            active.len()
        )));
    }
    let widened = epsilons.map(|e| widened_epsilons(matrix, e));
    let eps: Vec<f64> = active.iter().map(|&c| widened.as_ref().map_or(0.0, |e| e[c])).collect();
    let mut oracle = ExactOracle {
        proj: &proj,
        eps,
        skip_identity: options.skip_identity_cases,
        memo: BTreeMap::new(),
    };
    let full_pool = mask_of(d);
    let all_cases = mask_of(active.len());
    let mut by_vector = oracle.solve(full_pool, all_cases);
    // Averaging over case choices leaves rounding in the total.
    let total: f64 = by_vector.iter().sum();
    for p in &mut by_vector {
        *p /= total;
    }
    SelectionDistribution::new(proj.expand(&by_vector))
}

fn mask_of(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    let mut m = mask;
    core::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(b)
        }
    })
}

struct ExactOracle<'a> {
    proj: &'a Projection,
    eps: Vec<f64>,
    skip_identity: bool,
    memo: BTreeMap<(u64, u64), Vec<f64>>,
}

impl ExactOracle<'_> {
    fn filter(&self, pool: u64, case: usize) -> u64 {
        let vals = &self.proj.values;
        let best = bits(pool).map(|v| vals[v][case]).fold(f64::INFINITY, f64::min);
        let threshold = best + self.eps[case];
        bits(pool)
            .filter(|&v| vals[v][case] <= threshold)
            .fold(0, |m, v| m | (1 << v))
    }

    fn uniform(&self, pool: u64) -> Vec<f64> {
        let mult = &self.proj.multiplicity;
        let total: usize = bits(pool).map(|v| mult[v]).sum();
        let mut out = alloc::vec![0.0; mult.len()];
        for v in bits(pool) {
            out[v] = mult[v] as f64 / total as f64;
        }
        out
    }

    fn solve(&mut self, pool: u64, cases: u64) -> Vec<f64> {
        if pool.count_ones() == 1 || cases == 0 {
            return self.uniform(pool);
        }
        let children: Vec<(usize, u64)> = bits(cases).map(|c| (c, self.filter(pool, c))).collect();
        let mut remaining = cases;
        if self.skip_identity {
            // A case that leaves this pool unchanged leaves every sub-pool
            // unchanged too, so it never affects the outcome.
            for &(c, child) in &children {
                if child == pool {
                    remaining &= !(1 << c);
                }
            }
            if remaining == 0 {
                return self.uniform(pool);
            }
        }
        if let Some(hit) = self.memo.get(&(pool, remaining)) {
            return hit.clone();
        }
        let n = remaining.count_ones() as f64;
        let mut out = alloc::vec![0.0; self.proj.values.len()];
        for (c, child) in children {
            if remaining & (1 << c) == 0 {
                continue;
            }
            let sub = self.solve(child, remaining & !(1 << c));
            for (o, s) in out.iter_mut().zip(&sub) {
                *o += s / n;
            }
        }
        self.memo.insert((pool, remaining), out.clone());
        out
    }
}

/// Plexicase: each distinct error vector scores
/// `s_v = sum over active c of [v elite on c] / (|active| * |elite(c)|)`,
/// where elite sets are computed once over the whole population (and counted
/// in distinct vectors). Vector mass is `s_v^alpha` normalized, split evenly
/// among the individuals sharing the vector. Individuals that are elite on
/// no case get exactly 0.
pub fn plexicase_distribution(
    matrix: &ErrorMatrix,
    active: &[usize],
    alpha: f64,
    epsilons: Option<&[f64]>,
) -> Result<SelectionDistribution> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(usage!("alpha must be positive, got {alpha}"));
    }
    matrix.check_active(active)?;
    if let Some(e) = epsilons {
        check_epsilons(matrix, e)?;
    }
    let epsilons = epsilons.map(|e| widened_epsilons(matrix, e));
    let proj = project(matrix, active);
    let d = proj.values.len();
    let share = 1.0 / active.len() as f64;
    let mut scores = alloc::vec![0.0; d];
    let mut elite = Vec::with_capacity(d);
    for (k, &c) in active.iter().enumerate() {
        let best = proj.values.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min);
        let threshold = best + epsilons.as_ref().map_or(0.0, |e| e[c]);
        elite.clear();
        elite.extend((0..d).filter(|&v| proj.values[v][k] <= threshold));
        let each = share / elite.len() as f64;
        for &v in &elite {
            scores[v] += each;
        }
    }
    let top = scores.iter().copied().fold(0.0, f64::max);
    if top.is_nan() || top <= 0.0 {
        return Err(Error::Internal("plexicase scores are all zero".into()));
    }
    let powered: Vec<f64> = scores
        .iter()
        .map(|&s| if s > 0.0 { libm::pow(s / top, alpha) } else { 0.0 })
        .collect();
    let total: f64 = powered.iter().sum();
    let by_vector: Vec<f64> = powered.iter().map(|p| p / total).collect();
    SelectionDistribution::new(proj.expand(&by_vector))
}

/// Monte-Carlo estimate: `trials` events of the configured selector, event
/// `k` on `RandomSource::stream(seed, k)`.
pub fn empirical_distribution(
    matrix: &ErrorMatrix,
    active: &[usize],
    config: &SelectorConfig,
    trials: u64,
    seed: u64,
) -> Result<SelectionDistribution> {
    if trials < 1 {
        return Err(usage!("trials must be at least 1"));
    }
    let selector = Selector::prepare(matrix, active, config)?;
    let mut counts = alloc::vec![0u64; matrix.n_individuals()];
    for k in 0..trials {
        counts[selector.select(&mut RandomSource::stream(seed, k))?.winner] += 1;
    }
    SelectionDistribution::from_counts(&counts)
}

/// Exact distributions of the aggregate baselines (tournament with
/// replacement on mean error, fitness-proportionate, uniform).
pub fn baseline_distribution(
    matrix: &ErrorMatrix,
    active: &[usize],
    config: &SelectorConfig,
) -> Result<SelectionDistribution> {
    config.validate()?;
    matrix.check_active(active)?;
    let n = matrix.n_individuals();
    let means: Vec<f64> = (0..n).map(|i| matrix.mean_error(i, active)).collect();
    let probs = match config.variant {
        Variant::UniformRandom => alloc::vec![1.0 / n as f64; n],
        Variant::FitnessProportionate => {
            let w: Vec<f64> = means.iter().map(|m| 1.0 / (1.0 + m)).collect();
            let total: f64 = w.iter().sum();
            w.iter().map(|x| x / total).collect()
        }
        Variant::Tournament => {
            let k = config.tournament_size as i32;
            means
                .iter()
                .map(|&v| {
                    let at_least = means.iter().filter(|&&m| m >= v).count() as f64 / n as f64;
                    let worse = means.iter().filter(|&&m| m > v).count() as f64 / n as f64;
                    let tied = means.iter().filter(|&&m| m == v).count() as f64;
                    (libm::pow(at_least, k as f64) - libm::pow(worse, k as f64)) / tied
                })
                .collect()
        }
        other => return Err(usage!("{other:?} is not a baseline selector")),
    };
    SelectionDistribution::new(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn dist(p: &[f64]) -> SelectionDistribution {
        SelectionDistribution::new(p.to_vec()).unwrap()
    }

    fn close(a: &SelectionDistribution, b: &[f64]) -> bool {
        a.probs().iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn exact_examples() {
        let abc = ErrorMatrix::from_rows(&[[0.0, 2.0], [2.0, 0.0], [1.0, 1.0]]).unwrap();
        assert!(close(
            &exact_distribution(&abc, &[0, 1], None).unwrap(),
            &[0.5, 0.5, 0.0]
        ));
        let ab = ErrorMatrix::from_rows(&[[0.0, 5.0], [0.0, 3.0]]).unwrap();
        assert!(close(&exact_distribution(&ab, &[0, 1], None).unwrap(), &[0.0, 1.0]));
        let one = ErrorMatrix::from_rows(&[[4.0, 1.0]]).unwrap();
        assert!(close(&exact_distribution(&one, &[0, 1], None).unwrap(), &[1.0]));
        let sym = ErrorMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(close(&exact_distribution(&sym, &[0, 1], None).unwrap(), &[0.5, 0.5]));
    }

    #[test]
    fn exact_splits_duplicates() {
        let m = ErrorMatrix::from_rows(&[[0.0, 2.0], [2.0, 0.0], [0.0, 2.0]]).unwrap();
        assert!(close(
            &exact_distribution(&m, &[0, 1], None).unwrap(),
            &[0.25, 0.5, 0.25]
        ));
    }

    #[test]
    fn exact_with_epsilon() {
        let m = ErrorMatrix::from_rows(&[[0.0], [0.05], [0.3]]).unwrap();
        assert!(close(
            &exact_distribution(&m, &[0], Some(&[0.15])).unwrap(),
            &[0.5, 0.5, 0.0]
        ));
    }

    #[test]
    fn guard_is_enforced() {
        let rows: Vec<Vec<f64>> = (0..13).map(|i| vec![i as f64, 0.0]).collect();
        let m = ErrorMatrix::from_rows(&rows).unwrap();
        assert!(matches!(exact_distribution(&m, &[0, 1], None), Err(Error::Resource(_))));
        let opts = ExactOptions {
            override_guard: true,
            ..ExactOptions::default()
        };
        let d = exact_distribution_with(&m, &[0, 1], None, &opts).unwrap();
        assert_eq!(d.support(), vec![0]);
    }

    #[test]
    fn plexicase_examples() {
        let abc = ErrorMatrix::from_rows(&[[0.0, 2.0], [2.0, 0.0], [1.0, 1.0]]).unwrap();
        assert!(close(
            &plexicase_distribution(&abc, &[0, 1], 1.0, None).unwrap(),
            &[0.5, 0.5, 0.0]
        ));
        let ab = ErrorMatrix::from_rows(&[[0.0, 5.0], [0.0, 3.0]]).unwrap();
        let p = plexicase_distribution(&ab, &[0, 1], 1.0, None).unwrap();
        assert!(close(&p, &[0.25, 0.75]));
        let e = exact_distribution(&ab, &[0, 1], None).unwrap();
        assert!((total_variation(&p, &e).unwrap() - 0.25).abs() < 1e-12);
        let sharp = plexicase_distribution(&ab, &[0, 1], 64.0, None).unwrap();
        assert!(sharp.max() >= p.max());
    }

    #[test]
    fn plexicase_rejects_bad_alpha() {
        let ab = ErrorMatrix::from_rows(&[[0.0, 5.0], [0.0, 3.0]]).unwrap();
        assert!(plexicase_distribution(&ab, &[0, 1], 0.0, None).is_err());
        assert!(plexicase_distribution(&ab, &[0, 1], f64::NAN, None).is_err());
    }

    #[test]
    fn tv_examples() {
        assert_eq!(total_variation(&dist(&[0.5, 0.5]), &dist(&[0.5, 0.5])).unwrap(), 0.0);
        assert_eq!(total_variation(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap(), 1.0);
        assert_eq!(total_variation(&dist(&[0.25, 0.75]), &dist(&[0.0, 1.0])).unwrap(), 0.25);
        assert!(total_variation(&dist(&[1.0]), &dist(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(SelectionDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(SelectionDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(SelectionDistribution::new(vec![]).is_err());
        assert!(SelectionDistribution::from_counts(&[0, 0]).is_err());
    }

    fn frequencies(d: &SelectionDistribution, draws: u64) -> Vec<f64> {
        let mut counts = vec![0u64; d.len()];
        for k in 0..draws {
            counts[sample_index(d, &mut RandomSource::stream(9, k))] += 1;
        }
        counts.iter().map(|&c| c as f64 / draws as f64).collect()
    }

    #[test]
    fn sampling_examples() {
        assert!(frequencies(&dist(&[0.0, 1.0, 0.0]), 1000) == vec![0.0, 1.0, 0.0]);
        let f = frequencies(&dist(&[0.5, 0.5]), 10_000);
        assert!((f[0] - 0.5).abs() < 0.02);
        let f = frequencies(&dist(&[0.25, 0.75]), 100_000);
        assert!((f[0] - 0.25).abs() < 0.01);
    }

    #[test]
    fn empirical_examples() {
        let abc = ErrorMatrix::from_rows(&[[0.0, 2.0], [2.0, 0.0], [1.0, 1.0]]).unwrap();
        let lex = SelectorConfig::new(Variant::Lexicase);
        let e = empirical_distribution(&abc, &[0, 1], &lex, 100_000, 1).unwrap();
        assert!(total_variation(&e, &dist(&[0.5, 0.5, 0.0])).unwrap() < 0.01);
        let u =
            empirical_distribution(&abc, &[0, 1], &SelectorConfig::new(Variant::UniformRandom), 100_000, 1).unwrap();
        assert!(u.probs().iter().all(|p| (p - 1.0 / 3.0).abs() < 0.01));
        let one = empirical_distribution(&abc, &[0, 1], &lex, 1, 1).unwrap();
        assert_eq!(one.probs().iter().filter(|p| **p == 1.0).count(), 1);
    }

    #[test]
    fn baseline_exact_examples() {
        let m = ErrorMatrix::from_rows(&[[0.0, 0.0], [9.0, 9.0]]).unwrap();
        let t = baseline_distribution(&m, &[0, 1], &SelectorConfig::new(Variant::Tournament)).unwrap();
        assert!(close(&t, &[0.75, 0.25]));
        let m = ErrorMatrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let f = baseline_distribution(&m, &[0], &SelectorConfig::new(Variant::FitnessProportionate)).unwrap();
        assert!(close(&f, &[2.0 / 3.0, 1.0 / 3.0]));
        let mut one = SelectorConfig::new(Variant::Tournament);
        one.tournament_size = 1;
        let t1 = baseline_distribution(&m, &[0], &one).unwrap();
        let u = baseline_distribution(&m, &[0], &SelectorConfig::new(Variant::UniformRandom)).unwrap();
        assert!(close(&t1, u.probs()));
    }
}
