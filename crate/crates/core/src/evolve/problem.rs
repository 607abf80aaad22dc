//! Case-defined problems.

use alloc::string::String;
use alloc::vec::Vec;

use super::program::{ExprProgram, PrimitiveSet, ERROR_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// `|output - target|`.
    Absolute,
    /// 0 when output and target agree as booleans, else 1.
    Mismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ProblemId {
    /// `x^4 + x^3 + x^2 + x` on 20 evenly spaced points in `[-1, 1]`.
    Quartic,
    /// The same target on 200 points.
    QuarticDense,
    /// Odd parity of 4 bits (16 cases).
    Parity4,
    /// 6-multiplexer: 2 address bits select one of 4 data bits (64 cases).
    Multiplexer6,
    /// Constant 0 target with the constant 0 available as a terminal.
    Constant,
}

impl ProblemId {
    pub fn build(self) -> Problem {
        match self {
            ProblemId::Quartic => Problem::quartic(),
            ProblemId::QuarticDense => Problem::quartic_points(200),
            ProblemId::Parity4 => Problem::parity(4),
            ProblemId::Multiplexer6 => Problem::multiplexer6(),
            ProblemId::Constant => Problem::constant_zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub name: String,
    pub primitives: PrimitiveSet,
    pub error_kind: ErrorKind,
    pub train_inputs: Vec<Vec<f64>>,
    pub train_targets: Vec<f64>,
    pub test_inputs: Vec<Vec<f64>>,
    pub test_targets: Vec<f64>,
    /// A case is solved when its error is at most this.
    pub solve_threshold: f64,
}

fn bits(value: usize, width: usize) -> Vec<f64> {
    (0..width).map(|b| ((value >> b) & 1) as f64).collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

impl Problem {
    pub fn quartic() -> Self {
        Self::quartic_points(20)
    }

    /// Quartic target on `n >= 2` evenly spaced training points.
    pub fn quartic_points(n: usize) -> Self {
        let f = |x: f64| x * x * x * x + x * x * x + x * x + x;
        let train = linspace(-1.0, 1.0, n);
        // Held-out points fall between training points.
        let test: Vec<f64> = (0..n).map(|k| -1.0 + 2.0 * (k as f64 + 0.5) / n as f64).collect();
        Self {
            name: if n == 20 {
                "quartic".into()
            } else {
                alloc::format!("quartic{n}")
            },
            primitives: PrimitiveSet::arithmetic(1, Vec::new(), true),
            error_kind: ErrorKind::Absolute,
            train_targets: train.iter().map(|&x| f(x)).collect(),
            train_inputs: train.iter().map(|&x| alloc::vec![x]).collect(),
            test_targets: test.iter().map(|&x| f(x)).collect(),
            test_inputs: test.iter().map(|&x| alloc::vec![x]).collect(),
            solve_threshold: 0.01,
        }
    }

    /// Odd parity over `n` bits; the test set equals the (exhaustive)
    /// training set.
    pub fn parity(n: usize) -> Self {
        let inputs: Vec<Vec<f64>> = (0..1usize << n).map(|v| bits(v, n)).collect();
        let targets: Vec<f64> = (0..1usize << n).map(|v| (v.count_ones() % 2) as f64).collect();
        Self {
            name: alloc::format!("parity{n}"),
            primitives: PrimitiveSet::boolean(n),
            error_kind: ErrorKind::Mismatch,
            test_inputs: inputs.clone(),
            test_targets: targets.clone(),
            train_inputs: inputs,
            train_targets: targets,
            solve_threshold: 0.0,
        }
    }

    /// Inputs are `(a0, a1, d0, d1, d2, d3)`; the target is `d[a0 + 2*a1]`.
    pub fn multiplexer6() -> Self {
        let inputs: Vec<Vec<f64>> = (0..64).map(|v| bits(v, 6)).collect();
        let targets: Vec<f64> = inputs
            .iter()
            .map(|x| {
                let address = x[0] as usize + 2 * x[1] as usize;
                x[2 + address]
            })
            .collect();
        Self {
            name: "multiplexer6".into(),
            primitives: PrimitiveSet::boolean(6),
            error_kind: ErrorKind::Mismatch,
            test_inputs: inputs.clone(),
            test_targets: targets.clone(),
            train_inputs: inputs,
            train_targets: targets,
            solve_threshold: 0.0,
        }
    }

    pub fn constant_zero() -> Self {
        let xs = linspace(-1.0, 1.0, 10);
        Self {
            name: "constant".into(),
            primitives: PrimitiveSet::arithmetic(1, alloc::vec![0.0], true),
            error_kind: ErrorKind::Absolute,
            train_inputs: xs.iter().map(|&x| alloc::vec![x]).collect(),
            train_targets: alloc::vec![0.0; xs.len()],
            test_inputs: xs.iter().map(|&x| alloc::vec![x + 0.05]).collect(),
            test_targets: alloc::vec![0.0; xs.len()],
            solve_threshold: 0.0,
        }
    }

    pub fn n_cases(&self) -> usize {
        self.train_targets.len()
    }

    fn error(&self, output: f64, target: f64) -> f64 {
        let e = match self.error_kind {
            ErrorKind::Absolute => (output - target).abs(),
            ErrorKind::Mismatch => f64::from((output != 0.0) != (target != 0.0)),
        };
        if e.is_finite() {
            e.min(ERROR_CAP)
        } else {
            ERROR_CAP
        }
    }

    /// Error on training case `case`.
    pub fn case_error(&self, program: &ExprProgram, case: usize) -> f64 {
        self.error(program.eval(&self.train_inputs[case]), self.train_targets[case])
    }

    pub fn solves_all(&self, program: &ExprProgram) -> bool {
        (0..self.n_cases()).all(|c| self.case_error(program, c) <= self.solve_threshold)
    }

    /// True when every held-out case is solved.
    pub fn generalizes(&self, program: &ExprProgram) -> bool {
        self.test_inputs
            .iter()
            .zip(&self.test_targets)
            .all(|(x, &t)| self.error(program.eval(x), t) <= self.solve_threshold)
    }
}

/// Errors of `program` on the given training cases.
pub fn evaluate_program(program: &ExprProgram, problem: &Problem, cases: &[usize]) -> Vec<f64> {
    cases.iter().map(|&c| problem.case_error(program, c)).collect()
}
