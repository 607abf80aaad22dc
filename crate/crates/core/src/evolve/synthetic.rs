//! Error matrices with planted structure: synonymous case groups,
//! specialists and mediocre generalists.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{usage, Result};
use crate::matrix::ErrorMatrix;
use crate::rng::RandomSource;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyntheticSpec {
    pub n_individuals: usize,
    /// Number of duplicate columns in each synonymous group. Columns are laid
    /// out group by group.
    pub group_sizes: Vec<usize>,
    /// `(individual, case)`: the individual is the unique minimizer of the
    /// case and has the maximal error on every other case.
    pub specialists: Vec<(usize, usize)>,
    /// Individuals placed strictly between each column's best and worst
    /// error, so they are elite on no case.
    pub generalists: Vec<usize>,
    /// Binary errors: probability of flipping each duplicate entry.
    /// Continuous errors: width of uniform noise added to each duplicate.
    pub noise: f64,
    /// Errors uniform in `[0, 1)` instead of pass/fail.
    pub continuous: bool,
}

impl SyntheticSpec {
    pub fn n_cases(&self) -> usize {
        self.group_sizes.iter().sum()
    }

    /// Case indices of each group.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut start = 0;
        self.group_sizes
            .iter()
            .map(|&g| {
                let r = (start..start + g).collect();
                start += g;
                r
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_individuals;
        let m = self.n_cases();
        if n == 0 || self.group_sizes.is_empty() || self.group_sizes.contains(&0) {
            return Err(usage!("synthetic matrix needs individuals and nonempty case groups"));
        }
        if !self.continuous && n < 64 && (1u64 << n) < self.group_sizes.len() as u64 + 2 {
            return Err(usage!(
                "{n} individuals cannot give {} distinct pass/fail groups",
                self.group_sizes.len()
            ));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(usage!("noise must be in [0, 1], got {}", self.noise));
        }
        let mut used = alloc::vec![false; n];
        for &(i, c) in &self.specialists {
            if i >= n || c >= m {
                return Err(usage!("specialist ({i}, {c}) out of range"));
            }
            if core::mem::replace(&mut used[i], true) {
                return Err(usage!("individual {i} planted twice"));
            }
        }
        for &g in &self.generalists {
            if g >= n {
                return Err(usage!("generalist {g} out of range"));
            }
            if core::mem::replace(&mut used[g], true) {
                return Err(usage!("individual {g} planted twice"));
            }
        }
        let mut cases: Vec<usize> = self.specialists.iter().map(|s| s.1).collect();
        cases.sort_unstable();
        if cases.windows(2).any(|w| w[0] == w[1]) {
            return Err(usage!("two specialists planted on one case"));
        }
        Ok(())
    }
}

/// Generates a matrix following `spec`.
pub fn synthetic_matrix(spec: &SyntheticSpec, rng: &mut RandomSource) -> Result<ErrorMatrix> {
    spec.validate()?;
    let n = spec.n_individuals;
    let m = spec.n_cases();
    let mut errors = alloc::vec![0.0; n * m];
    let mut bases: Vec<Vec<f64>> = Vec::new();
    for (group, cases) in spec.groups().into_iter().enumerate() {
        // Pass/fail bases must differ from each other and from the constant
        // columns so groups stay distinguishable.
        let base = loop {
            let b: Vec<f64> = (0..n)
                .map(|_| {
                    if spec.continuous {
                        rng.random::<f64>()
                    } else {
                        f64::from(rng.random_bool(0.5))
                    }
                })
                .collect();
            let constant = b.iter().all(|&v| v == b[0]);
            if spec.continuous || (!constant && !bases.contains(&b)) {
                break b;
            }
        };
        for (k, &c) in cases.iter().enumerate() {
            for i in 0..n {
                let mut v = base[i];
                if k > 0 && spec.noise > 0.0 {
                    if spec.continuous {
                        v += rng.random::<f64>() * spec.noise;
                    } else if rng.random_bool(spec.noise) {
                        v = 1.0 - v;
                    }
                }
                errors[i * m + c] = v;
            }
        }
        debug_assert_eq!(bases.len(), group);
        bases.push(base);
    }

    let worst = if spec.continuous { 1.0 + spec.noise } else { 1.0 };
    for &(s, case) in &spec.specialists {
        for c in 0..m {
            errors[s * m + c] = if c == case { 0.0 } else { worst };
        }
        for i in (0..n).filter(|&i| i != s) {
            let e = &mut errors[i * m + case];
            if *e <= 0.0 {
                *e = worst;
            }
        }
    }
    for &g in &spec.generalists {
        for c in 0..m {
            let others = (0..n)
                .filter(|&i| i != g && !spec.generalists.contains(&i))
                .map(|i| errors[i * m + c]);
            let (lo, hi) = others.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            errors[g * m + c] = if lo < hi { (lo + hi) / 2.0 } else { lo + 1.0 };
        }
    }
    ErrorMatrix::new(n, m, errors)
}
