//! Transfer operator `ℒ_g f(x) = Σ_s g(sx) f(sx)` on cylinder functions.
//!
//! For a finite-memory model with memory `M` the operator maps functions of
//! the first `W ≥ max(M, 1)` coordinates to functions of the same window, so
//! it is a sparse `|S|^W × |S|^W` matrix with `|S|` entries per row. A
//! g-measure is a fixed point of the dual action. Long-range models are
//! handled through their finite-memory surrogates with an explicit error
//! term.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::gmodel::{lex_index, FiniteMemory, GModel, GModelError, Word};

/// Default cap on power iterations.
pub const DEFAULT_ITERATION_CAP: usize = 100_000;

/// Largest cylinder window the operator will materialize.
pub const STATE_BUDGET: usize = 1 << 22;

const PARALLEL_THRESHOLD: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransferError {
    #[error("function has {got} values, operator acts on {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("power iteration did not converge in {iterations} steps (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("window of {window} coordinates needs {states} states, budget is {budget}")]
    Budget {
        window: usize,
        states: usize,
        budget: usize,
    },
    #[error("tolerance must be positive")]
    InvalidTolerance,
    #[error("window {window} is smaller than the model memory {memory}")]
    WindowTooSmall { window: usize, memory: usize },
    #[error(transparent)]
    Model(#[from] GModelError),
}

/// A real function of the first `window` coordinates, stored over all
/// `|S|^window` words in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderFunction {
    pub window: usize,
    pub values: Vec<f64>,
}

impl CylinderFunction {
    pub fn constant(alphabet_size: usize, window: usize, value: f64) -> Self {
        Self {
            window,
            values: vec![value; alphabet_size.pow(window as u32)],
        }
    }

    /// `1[ζ]` for a word `ζ` anchored at 0.
    pub fn indicator(alphabet_size: usize, word: &Word) -> Self {
        let window = word.len();
        let mut values = vec![0.0; alphabet_size.pow(window as u32)];
        values[lex_index(word.symbols(), alphabet_size)] = 1.0;
        Self { window, values }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Same function viewed on a wider window.
    pub fn lift(&self, alphabet_size: usize, window: usize) -> Self {
        assert!(window >= self.window);
        let drop = alphabet_size.pow((window - self.window) as u32);
        let values = (0..alphabet_size.pow(window as u32))
            .map(|i| self.values[i / drop])
            .collect();
        Self { window, values }
    }
}

/// `sup f - inf f`.
pub fn oscillation(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

#[derive(Debug, Clone)]
pub struct TransferOperator {
    model: FiniteMemory,
    window: usize,
    base: usize,
}

impl TransferOperator {
    /// Operator on the smallest useful window, `max(M, 1)`.
    pub fn new(model: FiniteMemory) -> Result<Self, TransferError> {
        let window = model.memory().max(1);
        Self::with_window(model, window)
    }

    pub fn with_window(model: FiniteMemory, window: usize) -> Result<Self, TransferError> {
        let memory = model.memory();
        if window < memory.max(1) {
            return Err(TransferError::WindowTooSmall { window, memory });
        }
        let base = model.alphabet().size();
        let states = state_count(base, window)?;
        debug_assert!(states <= STATE_BUDGET);
        Ok(Self {
            model,
            window,
            base,
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn state_dim(&self) -> usize {
        self.base.pow(self.window as u32)
    }

    pub fn model(&self) -> &FiniteMemory {
        &self.model
    }

    /// `g(s x)` for the window word with index `x`.
    #[inline]
    fn weight(&self, s: usize, x: usize) -> f64 {
        let m = self.model.memory();
        let context = x / self.base.pow((self.window - m) as u32);
        self.model.table()[s * self.base.pow(m as u32) + context]
    }

    /// Index of `s x_0 ... x_{W-2}`.
    #[inline]
    fn prepend(&self, s: usize, x: usize) -> usize {
        s * self.base.pow(self.window as u32 - 1) + x / self.base
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>, TransferError> {
        self.check(f.len())?;
        let row = |x: usize| -> f64 {
            (0..self.base)
                .map(|s| self.weight(s, x) * f[self.prepend(s, x)])
                .sum()
        };
        let dim = self.state_dim();
        Ok(if dim >= PARALLEL_THRESHOLD {
            (0..dim).into_par_iter().map(row).collect()
        } else {
            (0..dim).map(row).collect()
        })
    }

    /// `ℒ_g^n f`; `n = 0` returns `f`.
    pub fn apply_n(&self, f: &[f64], n: usize) -> Result<Vec<f64>, TransferError> {
        self.check(f.len())?;
        let mut current = f.to_vec();
        for _ in 0..n {
            current = self.apply(&current)?;
        }
        Ok(current)
    }

    /// Dual action on measures of window cylinders: `(ℒ* μ)(f) = μ(ℒ f)`.
    pub fn apply_dual(&self, mu: &[f64]) -> Result<Vec<f64>, TransferError> {
        self.check(mu.len())?;
        let mut out = vec![0.0; mu.len()];
        for (x, &mass) in mu.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for s in 0..self.base {
                out[self.prepend(s, x)] += mass * self.weight(s, x);
            }
        }
        Ok(out)
    }

    pub fn stationary(&self, tol: f64) -> Result<StationaryMeasure, TransferError> {
        self.stationary_with_cap(tol, DEFAULT_ITERATION_CAP)
    }

    /// Power iteration on the dual action from the uniform measure.
    pub fn stationary_with_cap(
        &self,
        tol: f64,
        cap: usize,
    ) -> Result<StationaryMeasure, TransferError> {
        if !(tol > 0.0) {
            return Err(TransferError::InvalidTolerance);
        }
        let dim = self.state_dim();
        let mut mu = vec![1.0 / dim as f64; dim];
        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        while iterations < cap {
            let next = self.apply_dual(&mu)?;
            residual = next.iter().zip(&mu).map(|(a, b)| (a - b).abs()).sum();
            mu = next;
            iterations += 1;
            if residual < tol {
                break;
            }
        }
        if residual >= tol {
            return Err(TransferError::NotConverged {
                iterations,
                residual,
            });
        }
        let total: f64 = mu.iter().sum();
        mu.iter_mut().for_each(|p| *p /= total);
        Ok(StationaryMeasure {
            model: self.model.clone(),
            window: self.window,
            probs: mu,
            residual,
            iterations,
            unique: self.closed_classes() == 1,
        })
    }

    /// Number of closed communicating classes of the window chain
    /// `x ↦ s x_0 ... x_{W-2}` (edges where `g(sx) > 0`).
    pub fn closed_classes(&self) -> usize {
        let dim = self.state_dim();
        let mut graph = DiGraph::<(), ()>::with_capacity(dim, dim * self.base);
        let nodes: Vec<_> = (0..dim).map(|_| graph.add_node(())).collect();
        for x in 0..dim {
            for s in 0..self.base {
                if self.weight(s, x) > 0.0 {
                    graph.add_edge(nodes[x], nodes[self.prepend(s, x)], ());
                }
            }
        }
        let components = tarjan_scc(&graph);
        let mut component_of = vec![0usize; dim];
        for (c, members) in components.iter().enumerate() {
            for n in members {
                component_of[n.index()] = c;
            }
        }
        components
            .iter()
            .enumerate()
            .filter(|(c, members)| {
                members.iter().all(|n| {
                    graph
                        .neighbors(*n)
                        .all(|m| component_of[m.index()] == *c)
                })
            })
            .count()
    }

    fn check(&self, len: usize) -> Result<(), TransferError> {
        let expected = self.state_dim();
        if len != expected {
            return Err(TransferError::DimensionMismatch { expected, got: len });
        }
        Ok(())
    }
}

/// Invariant measure on window cylinders, extendable to longer words.
#[derive(Debug, Clone)]
pub struct StationaryMeasure {
    model: FiniteMemory,
    pub window: usize,
    /// Probabilities of all window words (lexicographic order).
    pub probs: Vec<f64>,
    /// `‖ℒ* μ - μ‖₁` at the last iterate.
    pub residual: f64,
    pub iterations: usize,
    /// Whether the window chain has a single closed class.
    pub unique: bool,
}

impl StationaryMeasure {
    /// `μ([x_0 ... x_{n-1}])` for a word occupying coordinates `0..n`.
    pub fn prob(&self, word: &[usize]) -> f64 {
        let base = self.model.alphabet().size();
        let w = self.window;
        if word.len() <= w {
            let span = base.pow((w - word.len()) as u32);
            let start = lex_index(word, base) * span;
            return self.probs[start..start + span].iter().sum();
        }
        let head = word.len() - w;
        let factors: f64 = (0..head).map(|i| self.model.entry(&word[i..])).product();
        factors * self.probs[lex_index(&word[head..], base)]
    }
}

/// One row of [`uniqueness_diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationRow {
    pub n: usize,
    pub oscillation: f64,
    pub truncation_error: f64,
}

/// `sup ℒ_g^n f - inf ℒ_g^n f` for `n = 0..=n_max`.
///
/// Long-range models are replaced by their memory-`truncation` surrogate;
/// the reported error `2 n ‖f‖∞ δ` (with `δ = sup_x Σ_s |g - g_t|`) bounds the
/// change in oscillation. Finite-memory models ignore `truncation`.
pub fn uniqueness_diagnostic(
    model: &GModel,
    f: &CylinderFunction,
    n_max: usize,
    truncation: usize,
) -> Result<Vec<OscillationRow>, TransferError> {
    let base = model.alphabet().size();
    let (fm, delta) = match model {
        GModel::FiniteMemory(m) => (m.clone(), 0.0),
        GModel::LongRangeLinear(_) => {
            state_count(base, truncation.max(1))?;
            model.truncated(truncation)?
        }
    };
    let window = fm.memory().max(f.window).max(1);
    let op = TransferOperator::with_window(fm, window)?;
    let expected = base.pow(f.window as u32);
    if f.values.len() != expected {
        return Err(TransferError::DimensionMismatch {
            expected,
            got: f.values.len(),
        });
    }
    let norm = f.sup_norm();
    let mut current = f.lift(base, window).values;
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            current = op.apply(&current)?;
        }
        rows.push(OscillationRow {
            n,
            oscillation: oscillation(&current),
            truncation_error: 2.0 * n as f64 * norm * delta,
        });
    }
    Ok(rows)
}

/// Samples `len` symbols of the finite-memory chain, growing leftward from a
/// uniformly random window after `burn_in` steps. The result is listed
/// leftmost first, i.e. it is a window of a stationary-like path.
pub fn sample_path<R: Rng + ?Sized>(
    model: &FiniteMemory,
    len: usize,
    burn_in: usize,
    rng: &mut R,
) -> Vec<usize> {
    let base = model.alphabet().size();
    let m = model.memory();
    // Stored right-to-left: rev[0] is the rightmost coordinate.
    let mut rev: Vec<usize> = (0..m).map(|_| rng.gen_range(0..base)).collect();
    let mut window = vec![0usize; m + 1];
    for _ in 0..burn_in + len {
        let k = rev.len();
        for j in 0..m {
            window[j + 1] = rev[k - 1 - j];
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut pick = base - 1;
        for s in 0..base {
            window[0] = s;
            acc += model.entry(&window);
            if u < acc {
                pick = s;
                break;
            }
        }
        rev.push(pick);
    }
    let mut path: Vec<usize> = rev[rev.len() - len..].to_vec();
    path.reverse();
    path
}

fn state_count(base: usize, window: usize) -> Result<usize, TransferError> {
    match base.checked_pow(window as u32) {
        Some(states) if states <= STATE_BUDGET => Ok(states),
        other => Err(TransferError::Budget {
            window,
            states: other.unwrap_or(usize::MAX),
            budget: STATE_BUDGET,
        }),
    }
}
