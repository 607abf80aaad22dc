//! Expression-tree genomes stored as prefix-order node vectors.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{usage, Result};
use crate::rng::RandomSource;

/// Errors above this value, and non-finite outputs, are clamped to it.
pub const ERROR_CAP: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Op {
    Add,
    Sub,
    Mul,
    /// Protected division: `x / 0 = 1`.
    Div,
    And,
    Or,
    Not,
    /// `If(c, a, b)`: `a` when `c` is true, else `b`.
    If,
    Var(u8),
    Const(f64),
}

impl Op {
    pub fn arity(self) -> usize {
        match self {
            Op::Add | Op::Sub | Op::Mul | Op::Div | Op::And | Op::Or => 2,
            Op::Not => 1,
            Op::If => 3,
            Op::Var(_) | Op::Const(_) => 0,
        }
    }
}

fn truth(v: f64) -> bool {
    v != 0.0
}

fn boolean(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Functions and terminals a tree may use.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimitiveSet {
    pub functions: Vec<Op>,
    pub n_vars: usize,
    /// Fixed constants available as terminals.
    pub constants: Vec<f64>,
    /// Whether ephemeral random constants (uniform in `[-1, 1]`, frozen once
    /// drawn) are available as terminals.
    pub ephemeral: bool,
}

impl PrimitiveSet {
    /// `{+, -, *, protected /}` over `n_vars` variables.
    pub fn arithmetic(n_vars: usize, constants: Vec<f64>, ephemeral: bool) -> Self {
        Self {
            functions: alloc::vec![Op::Add, Op::Sub, Op::Mul, Op::Div],
            n_vars,
            constants,
            ephemeral,
        }
    }

    /// `{AND, OR, NOT, IF}` over `n_inputs` boolean inputs.
    pub fn boolean(n_inputs: usize) -> Self {
        Self {
            functions: alloc::vec![Op::And, Op::Or, Op::Not, Op::If],
            n_vars: n_inputs,
            constants: Vec::new(),
            ephemeral: false,
        }
    }

    fn n_terminals(&self) -> usize {
        self.n_vars + self.constants.len() + usize::from(self.ephemeral)
    }

    pub fn validate(&self) -> Result<()> {
        if self.functions.is_empty() || self.n_terminals() == 0 {
            return Err(usage!("primitive set needs at least one function and one terminal"));
        }
        if self.functions.iter().any(|f| f.arity() == 0) {
            return Err(usage!("terminals listed among functions"));
        }
        if self.n_vars > u8::MAX as usize {
            return Err(usage!("at most 255 variables are supported"));
        }
        Ok(())
    }

    pub fn random_terminal(&self, rng: &mut RandomSource) -> Op {
        let k = rng.random_range(0..self.n_terminals());
        if k < self.n_vars {
            Op::Var(k as u8)
        } else if k < self.n_vars + self.constants.len() {
            Op::Const(self.constants[k - self.n_vars])
        } else {
            Op::Const(rng.random_range(-1.0..=1.0))
        }
    }

    fn random_function(&self, rng: &mut RandomSource) -> Op {
        self.functions[rng.random_range(0..self.functions.len())]
    }
}

/// A tree in prefix order. The root has depth 0.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExprProgram {
    nodes: Vec<Op>,
}

impl ExprProgram {
    /// Validates arity structure.
    pub fn from_nodes(nodes: Vec<Op>) -> Result<Self> {
        let mut need: usize = 1;
        for (k, op) in nodes.iter().enumerate() {
            if need == 0 {
                return Err(usage!("trailing nodes after a complete tree at position {k}"));
            }
            need = need - 1 + op.arity();
        }
        if need != 0 || nodes.is_empty() {
            return Err(usage!("incomplete tree"));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[Op] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// One past the last node of the subtree rooted at `start`.
    pub fn subtree_end(&self, start: usize) -> usize {
        let mut need = 1usize;
        let mut k = start;
        while need > 0 {
            need = need - 1 + self.nodes[k].arity();
            k += 1;
        }
        k
    }

    /// Depth of every node.
    pub fn node_depths(&self) -> Vec<usize> {
        let mut depths = Vec::with_capacity(self.nodes.len());
        // Stack of (depth, remaining children) for open function nodes.
        let mut open: Vec<(usize, usize)> = Vec::new();
        for op in &self.nodes {
            let d = open.last().map_or(0, |(d, _)| d + 1);
            depths.push(d);
            if let Some(top) = open.last_mut() {
                top.1 -= 1;
            }
            if op.arity() > 0 {
                open.push((d, op.arity()));
            }
            while let Some(&(_, 0)) = open.last() {
                open.pop();
            }
        }
        depths
    }

    pub fn depth(&self) -> usize {
        self.node_depths().into_iter().max().unwrap_or(0)
    }

    /// Evaluates on one input vector. Total: protected division and no
    /// failure paths; the result may be non-finite for extreme values.
    pub fn eval(&self, inputs: &[f64]) -> f64 {
        let mut k = 0;
        self.eval_at(&mut k, inputs)
    }

    fn eval_at(&self, k: &mut usize, x: &[f64]) -> f64 {
        let op = self.nodes[*k];
        *k += 1;
        match op {
            Op::Var(i) => x.get(i as usize).copied().unwrap_or(0.0),
            Op::Const(c) => c,
            Op::Not => boolean(!truth(self.eval_at(k, x))),
            Op::If => {
                let c = self.eval_at(k, x);
                let a = self.eval_at(k, x);
                let b = self.eval_at(k, x);
                if truth(c) {
                    a
                } else {
                    b
                }
            }
            _ => {
                let a = self.eval_at(k, x);
                let b = self.eval_at(k, x);
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => {
                        if b == 0.0 {
                            1.0
                        } else {
                            a / b
                        }
                    }
                    Op::And => boolean(truth(a) && truth(b)),
                    Op::Or => boolean(truth(a) || truth(b)),
                    _ => unreachable!(),
                }
            }
        }
    }

    /// A full tree: every leaf at depth exactly `depth`.
    pub fn full(pset: &PrimitiveSet, depth: usize, rng: &mut RandomSource) -> Self {
        let mut nodes = Vec::new();
        build(pset, depth, true, true, rng, &mut nodes);
        Self { nodes }
    }

    /// A grown tree of depth at most `depth`; the root is a function when
    /// `depth > 0`.
    pub fn grow(pset: &PrimitiveSet, depth: usize, rng: &mut RandomSource) -> Self {
        let mut nodes = Vec::new();
        build(pset, depth, false, true, rng, &mut nodes);
        Self { nodes }
    }

    fn splice(&self, start: usize, end: usize, donor: &[Op]) -> Self {
        let mut nodes = Vec::with_capacity(self.nodes.len() - (end - start) + donor.len());
        nodes.extend_from_slice(&self.nodes[..start]);
        nodes.extend_from_slice(donor);
        nodes.extend_from_slice(&self.nodes[end..]);
        Self { nodes }
    }

    /// Replaces the subtree at `at` in `self` with the subtree at `from` in
    /// `donor`.
    pub fn crossover_at(&self, at: usize, donor: &ExprProgram, from: usize) -> Self {
        let end = self.subtree_end(at);
        let donor_end = donor.subtree_end(from);
        self.splice(at, end, &donor.nodes[from..donor_end])
    }

    /// Replaces every function node at depth `max_depth` with a terminal.
    pub fn truncate(&self, pset: &PrimitiveSet, max_depth: usize, rng: &mut RandomSource) -> Self {
        let depths = self.node_depths();
        let mut nodes = Vec::with_capacity(self.nodes.len());
        let mut k = 0;
        while k < self.nodes.len() {
            if depths[k] >= max_depth && self.nodes[k].arity() > 0 {
                nodes.push(pset.random_terminal(rng));
                k = self.subtree_end(k);
            } else {
                nodes.push(self.nodes[k]);
                k += 1;
            }
        }
        Self { nodes }
    }
}

fn build(pset: &PrimitiveSet, depth: usize, full: bool, root: bool, rng: &mut RandomSource, out: &mut Vec<Op>) {
    let function = if depth == 0 {
        false
    } else if full || root {
        true
    } else {
        let nf = pset.functions.len();
        rng.random_range(0..nf + pset.n_terminals()) < nf
    };
    if function {
        let f = pset.random_function(rng);
        out.push(f);
        for _ in 0..f.arity() {
            build(pset, depth - 1, full, false, rng, out);
        }
    } else {
        out.push(pset.random_terminal(rng));
    }
}

/// Crossover and mutation probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VariationRates {
    pub crossover: f64,
    pub mutation: f64,
}

impl VariationRates {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("crossover", self.crossover), ("mutation", self.mutation)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(usage!("{name} rate must be in [0, 1], got {r}"));
            }
        }
        Ok(())
    }
}

/// Depth limit applied to offspring.
pub const MAX_DEPTH: usize = 10;
/// Maximum depth of subtrees grown by mutation.
pub const MUTATION_DEPTH: usize = 4;
const RETRIES: usize = 3;

/// One offspring. With probability `crossover` the first parent receives a
/// uniformly chosen subtree of the second (or of itself when alone) at a
/// uniformly chosen point; then with probability `mutation` a uniformly
/// chosen subtree is replaced by a grown one. Offspring deeper than
/// `max_depth` are retried 3 times, then truncated.
pub fn vary(
    parents: &[&ExprProgram],
    rates: VariationRates,
    pset: &PrimitiveSet,
    max_depth: usize,
    rng: &mut RandomSource,
) -> Result<ExprProgram> {
    let first = *parents
        .first()
        .ok_or_else(|| usage!("variation needs at least one parent"))?;
    let donor = parents.get(1).copied().unwrap_or(first);
    let mut child = first.clone();
    if rng.random_bool(rates.crossover) {
        child = bounded(max_depth, pset, rng, |rng| {
            let at = rng.random_range(0..first.len());
            let from = rng.random_range(0..donor.len());
            first.crossover_at(at, donor, from)
        });
    }
    if rng.random_bool(rates.mutation) {
        let base = child;
        child = bounded(max_depth, pset, rng, |rng| {
            let at = rng.random_range(0..base.len());
            let graft = ExprProgram::grow(pset, rng.random_range(0..=MUTATION_DEPTH), rng);
            base.crossover_at(at, &graft, 0)
        });
    }
    Ok(child)
}

fn bounded(
    max_depth: usize,
    pset: &PrimitiveSet,
    rng: &mut RandomSource,
    mut make: impl FnMut(&mut RandomSource) -> ExprProgram,
) -> ExprProgram {
    let mut attempt = make(rng);
    for _ in 0..RETRIES {
        if attempt.depth() <= max_depth {
            return attempt;
        }
        attempt = make(rng);
    }
    if attempt.depth() <= max_depth {
        attempt
    } else {
        attempt.truncate(pset, max_depth, rng)
    }
}
