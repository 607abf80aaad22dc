//! Population-by-case error matrices.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{usage, Result};

/// Dense, immutable `n_individuals x n_cases` grid of nonnegative finite
/// errors, row-major. An error of 0 is perfect performance on the case.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ErrorMatrix {
    n_individuals: usize,
    n_cases: usize,
    errors: Vec<f64>,
    individual_labels: Option<Vec<String>>,
    case_labels: Option<Vec<String>>,
}

impl ErrorMatrix {
    pub fn new(n_individuals: usize, n_cases: usize, errors: Vec<f64>) -> Result<Self> {
        if n_individuals == 0 || n_cases == 0 {
            return Err(usage!(
                "error matrix needs at least one individual and one case, got {n_individuals}x{n_cases}"
            ));
        }
        if errors.len() != n_individuals * n_cases {
            return Err(usage!(
                "expected {} error values for a {n_individuals}x{n_cases} matrix, got {}",
                n_individuals * n_cases,
                errors.len()
            ));
        }
        if let Some(k) = errors.iter().position(|e| !e.is_finite() || *e < 0.0) {
            return Err(usage!(
                "error value {} at individual {}, case {} is not a finite nonnegative number",
                errors[k],
                k / n_cases,
                k % n_cases
            ));
        }
        Ok(Self {
            n_individuals,
            n_cases,
            errors,
            individual_labels: None,
            case_labels: None,
        })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_cases = rows.first().map_or(0, |r| r.as_ref().len());
        let mut errors = Vec::with_capacity(rows.len() * n_cases);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cases {
                return Err(usage!("row {i} has {} values, expected {n_cases}", row.len()));
            }
            errors.extend_from_slice(row);
        }
        Self::new(rows.len(), n_cases, errors)
    }

    pub fn with_labels(
        mut self,
        individual_labels: Option<Vec<String>>,
        case_labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if let Some(l) = &individual_labels {
            if l.len() != self.n_individuals {
                return Err(usage!("{} individual labels for {} rows", l.len(), self.n_individuals));
            }
        }
        if let Some(l) = &case_labels {
            if l.len() != self.n_cases {
                return Err(usage!("{} case labels for {} cases", l.len(), self.n_cases));
            }
        }
        self.individual_labels = individual_labels;
        self.case_labels = case_labels;
        Ok(self)
    }

    #[inline]
    pub fn n_individuals(&self) -> usize {
        self.n_individuals
    }

    #[inline]
    pub fn n_cases(&self) -> usize {
        self.n_cases
    }

    /// Error of `individual` on `case`. Panics when out of range.
    #[inline]
    pub fn get(&self, individual: usize, case: usize) -> f64 {
        debug_assert!(case < self.n_cases);
        self.errors[individual * self.n_cases + case]
    }

    pub fn row(&self, individual: usize) -> &[f64] {
        let start = individual * self.n_cases;
        &self.errors[start..start + self.n_cases]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.errors.chunks_exact(self.n_cases)
    }

    pub fn column(&self, case: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_individuals).map(move |i| self.get(i, case))
    }

    pub fn values(&self) -> &[f64] {
        &self.errors
    }

    pub fn individual_labels(&self) -> Option<&[String]> {
        self.individual_labels.as_deref()
    }

    pub fn case_labels(&self) -> Option<&[String]> {
        self.case_labels.as_deref()
    }

    /// Checks that `cases` is a nonempty set of distinct in-range case indices.
    pub fn check_active(&self, cases: &[usize]) -> Result<()> {
        if cases.is_empty() {
            return Err(usage!("active case set is empty"));
        }
        let mut seen = alloc::vec![false; self.n_cases];
        for &c in cases {
            if c >= self.n_cases {
                return Err(usage!("case index {c} out of range for {} cases", self.n_cases));
            }
            if core::mem::replace(&mut seen[c], true) {
                return Err(usage!("case index {c} appears twice in the active set"));
            }
        }
        Ok(())
    }

    /// All case indices, in order.
    pub fn all_cases(&self) -> Vec<usize> {
        (0..self.n_cases).collect()
    }

    /// Mean error of `individual` over `cases`.
    pub fn mean_error(&self, individual: usize, cases: &[usize]) -> f64 {
        let row = self.row(individual);
        cases.iter().map(|&c| row[c]).sum::<f64>() / cases.len() as f64
    }

    /// Groups identical rows (bitwise equal values). Returns one representative
    /// row index per distinct vector, in first-occurrence order, and for each
    /// individual the position of its group.
    pub fn distinct_rows(&self) -> DistinctRows {
        let mut index: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut representatives = Vec::new();
        let mut group_of = Vec::with_capacity(self.n_individuals);
        let mut multiplicity: Vec<usize> = Vec::new();
        for (i, row) in self.rows().enumerate() {
            let key: Vec<u64> = row.iter().map(|v| canonical_bits(*v)).collect();
            let next = representatives.len();
            let g = *index.entry(key).or_insert(next);
            if g == next {
                representatives.push(i);
                multiplicity.push(0);
            }
            multiplicity[g] += 1;
            group_of.push(g);
        }
        DistinctRows {
            representatives,
            group_of,
            multiplicity,
        }
    }
}

// -0.0 and 0.0 compare equal and must land in the same group.
fn canonical_bits(v: f64) -> u64 {
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

/// Result of [`ErrorMatrix::distinct_rows`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistinctRows {
    pub representatives: Vec<usize>,
    pub group_of: Vec<usize>,
    pub multiplicity: Vec<usize>,
}

impl DistinctRows {
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }
}

/// The candidate pool during filtering: distinct individual indices, in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoolView(Vec<usize>);

impl PoolView {
    pub fn new(indices: Vec<usize>, n_individuals: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(usage!("pool must not be empty"));
        }
        let mut seen = alloc::vec![false; n_individuals];
        for &i in &indices {
            if i >= n_individuals {
                return Err(usage!("individual {i} out of range for {n_individuals} individuals"));
            }
            if core::mem::replace(&mut seen[i], true) {
                return Err(usage!("individual {i} appears twice in the pool"));
            }
        }
        Ok(Self(indices))
    }

    /// Every individual of the matrix.
    pub fn full(matrix: &ErrorMatrix) -> Self {
        Self((0..matrix.n_individuals()).collect())
    }

    pub(crate) fn from_vec_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(!indices.is_empty());
        Self(indices)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_bad_values() {
        assert!(ErrorMatrix::new(1, 2, vec![0.0, -1.0]).is_err());
        assert!(ErrorMatrix::new(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(ErrorMatrix::new(1, 2, vec![0.0, f64::INFINITY]).is_err());
        assert!(ErrorMatrix::new(0, 2, vec![]).is_err());
        assert!(ErrorMatrix::new(1, 0, vec![]).is_err());
        assert!(ErrorMatrix::new(2, 2, vec![0.0; 3]).is_err());
        assert!(ErrorMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0]]).is_err());
    }

    #[test]
    fn row_major_access() {
        let m = ErrorMatrix::from_rows(&[[0.0, 5.0], [0.0, 3.0]]).unwrap();
        assert_eq!(m.get(1, 1), 3.0);
        assert_eq!(m.row(0), &[0.0, 5.0]);
        assert_eq!(m.column(1).collect::<Vec<_>>(), vec![5.0, 3.0]);
        assert_eq!(m.mean_error(0, &[0, 1]), 2.5);
    }

    #[test]
    fn distinct_rows_groups_duplicates() {
        let m = ErrorMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0], [0.0, 1.0], [-0.0, 1.0]]).unwrap();
        let d = m.distinct_rows();
        assert_eq!(d.representatives, vec![0, 1]);
        assert_eq!(d.group_of, vec![0, 1, 0, 0]);
        assert_eq!(d.multiplicity, vec![3, 1]);
    }

    #[test]
    fn active_set_validation() {
        let m = ErrorMatrix::from_rows(&[[0.0, 1.0]]).unwrap();
        assert!(m.check_active(&[]).is_err());
        assert!(m.check_active(&[2]).is_err());
        assert!(m.check_active(&[1, 1]).is_err());
        assert!(m.check_active(&[1, 0]).is_ok());
    }

    #[test]
    fn pool_validation() {
        assert!(PoolView::new(vec![], 3).is_err());
        assert!(PoolView::new(vec![0, 0], 3).is_err());
        assert!(PoolView::new(vec![3], 3).is_err());
        assert_eq!(PoolView::new(vec![2, 0], 3).unwrap().as_slice(), &[2, 0]);
    }
}
