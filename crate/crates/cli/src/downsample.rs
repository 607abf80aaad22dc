//! Informed downsampling of one matrix.

use lexicase_core::sampling::{case_distance, informed_downsample, sample_size, SolveMatrix};
use lexicase_core::{ErrorMatrix, RandomSource};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleSize {
    Cases(usize),
    Rate(f64),
}

#[derive(Clone, Debug)]
pub struct DownsampleOptions {
    /// Errors at or below this count as solved. Required when the matrix
    /// holds non-integer errors.
    pub threshold: Option<f64>,
    pub size: SampleSize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DownsampleReport {
    pub n_individuals: usize,
    pub n_cases: usize,
    pub case_labels: Vec<String>,
    pub solve_threshold: f64,
    /// Individuals solving each case.
    pub pass_counts: Vec<usize>,
    /// Symmetric matrix of normalized Hamming distances between cases.
    pub distances: Vec<Vec<f64>>,
    /// Case indices in the order they joined the sample.
    pub sample: Vec<usize>,
    pub sample_labels: Vec<String>,
}

pub fn cmd_downsample(matrix: &ErrorMatrix, opts: &DownsampleOptions) -> Result<DownsampleReport> {
    let threshold = match opts.threshold {
        Some(t) if t.is_finite() && t >= 0.0 => t,
        Some(t) => {
            return Err(CliError::Usage(format!(
                "threshold must be finite and nonnegative, got {t}"
            )))
        }
        None if matrix.values().iter().any(|v| v.fract() != 0.0) => {
            return Err(CliError::Usage("real-valued errors need --threshold".into()))
        }
        None => 0.0,
    };
    let m = matrix.n_cases();
    let size = match opts.size {
        SampleSize::Cases(k) if (1..=m).contains(&k) => k,
        SampleSize::Cases(k) => return Err(CliError::Usage(format!("sample size {k} outside 1..={m}"))),
        SampleSize::Rate(r) if r > 0.0 && r <= 1.0 => sample_size(r, m),
        SampleSize::Rate(r) => return Err(CliError::Usage(format!("rate must be in (0, 1], got {r}"))),
    };
    let rows: Vec<usize> = (0..matrix.n_individuals()).collect();
    let solves = SolveMatrix::from_errors(matrix, &rows, threshold)?;
    let distances = (0..m)
        .map(|a| (0..m).map(|b| case_distance(&solves, a, b)).collect())
        .collect::<lexicase_core::Result<_>>()?;
    let sample = informed_downsample(&solves, size, &mut RandomSource::new(opts.seed))?;
    let case_labels = match matrix.case_labels() {
        Some(l) => l.to_vec(),
        None => (0..m).map(|c| format!("c{c}")).collect(),
    };
    Ok(DownsampleReport {
        n_individuals: matrix.n_individuals(),
        n_cases: m,
        solve_threshold: threshold,
        pass_counts: solves.pass_counts(),
        distances,
        sample_labels: sample.iter().map(|&c| case_labels[c].clone()).collect(),
        sample,
        case_labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planted() -> ErrorMatrix {
        // Three groups of two identical columns.
        let rows: Vec<Vec<f64>> = [[0, 1, 1], [1, 0, 1], [1, 1, 0], [0, 0, 1]]
            .iter()
            .map(|r| r.iter().flat_map(|&v| [f64::from(v), f64::from(v)]).collect())
            .collect();
        ErrorMatrix::from_rows(&rows).unwrap()
    }

    fn opts(size: SampleSize) -> DownsampleOptions {
        DownsampleOptions {
            threshold: None,
            size,
            seed: 3,
        }
    }

    #[test]
    fn one_case_per_group() {
        for seed in 0..50 {
            let r = cmd_downsample(
                &planted(),
                &DownsampleOptions {
                    seed,
                    ..opts(SampleSize::Cases(3))
                },
            )
            .unwrap();
            let mut groups: Vec<usize> = r.sample.iter().map(|c| c / 2).collect();
            groups.sort_unstable();
            assert_eq!(groups, vec![0, 1, 2]);
        }
    }

    #[test]
    fn sizes() {
        let all = cmd_downsample(&planted(), &opts(SampleSize::Cases(6))).unwrap();
        let mut s = all.sample.clone();
        s.sort_unstable();
        assert_eq!(s, (0..6).collect::<Vec<_>>());
        assert_eq!(
            cmd_downsample(&planted(), &opts(SampleSize::Rate(0.01)))
                .unwrap()
                .sample
                .len(),
            1
        );
        assert_eq!(all.distances[0][1], 0.0);
        assert_eq!(all.pass_counts[0], 2);
    }

    #[test]
    fn real_values_need_a_threshold() {
        let m = ErrorMatrix::from_rows(&[[0.5, 0.0]]).unwrap();
        assert!(matches!(
            cmd_downsample(&m, &opts(SampleSize::Cases(1))),
            Err(CliError::Usage(_))
        ));
        let with = DownsampleOptions {
            threshold: Some(0.5),
            ..opts(SampleSize::Cases(1))
        };
        assert_eq!(cmd_downsample(&m, &with).unwrap().pass_counts, vec![1, 1]);
    }
}
