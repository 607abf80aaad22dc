//! A small tree-GP harness for comparing selectors end to end.

pub mod problem;
pub mod program;
pub mod run;
pub mod synthetic;

pub use problem::{evaluate_program, Problem, ProblemId};
pub use program::{vary, ExprProgram, Op, PrimitiveSet, VariationRates, ERROR_CAP, MAX_DEPTH, MUTATION_DEPTH};
pub use run::{
    init_population, run_evolution, run_evolution_timed, GenerationRow, NoClock, RunConfig, RunRecord, Stopwatch,
};
pub use synthetic::{synthetic_matrix, SyntheticSpec};

use crate::matrix::ErrorMatrix;

/// Number of distinct error vectors (rows) in `matrix`.
pub fn behavioral_diversity(matrix: &ErrorMatrix) -> usize {
    matrix.distinct_rows().len()
}
