use rand::Rng;
use rayon::prelude::*;

use super::maximal::MaximalCoupling;
use super::schedule::{next_block, BlockSchedule, CouplingState};
use super::CouplingError;
use crate::gmodel::{lex_decode, GModel, GModelError, Interval, Word};
use crate::rng::stream_rng;

/// Longest block enumerated by default (`2^12` words on a binary alphabet).
pub const DEFAULT_BLOCK_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    pub block_cap: usize,
    /// Largest tolerated TV-distance between the enumerated block
    /// conditionals and the true ones.
    pub truncation_tolerance: f64,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            block_cap: DEFAULT_BLOCK_CAP,
            truncation_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockRecord {
    pub interval: Interval,
    pub run_before: usize,
    pub agreed: bool,
    pub truncation_error: f64,
}

/// One trajectory of the block coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSample {
    pub x: Word,
    pub y: Word,
    /// `disagree[n]` is `x_{-n} ≠ y_{-n}` for `n = 0..=depth`.
    pub disagree: Vec<bool>,
    pub blocks: Vec<BlockRecord>,
    pub max_truncation_error: f64,
}

fn check_tail(model: &GModel, tail: &Word) -> Result<(), CouplingError> {
    if !tail.is_empty() && tail.anchor() != 1 {
        return Err(CouplingError::InvalidTail(format!(
            "tail context must start at coordinate 1, got {}",
            tail.interval()
        )));
    }
    model
        .alphabet()
        .check(tail)
        .map_err(CouplingError::Model)
}

fn normalized(mut p: Vec<f64>) -> Vec<f64> {
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= s);
    p
}

/// Grows a coupled pair leftward from coordinate 0 past coordinate `-depth`,
/// with `tail_x`, `tail_y` fixed on `[1, L]`.
pub fn sample_block_coupling(
    model: &GModel,
    schedule: &BlockSchedule,
    depth: usize,
    tail_x: &Word,
    tail_y: &Word,
    seed: u64,
    config: &CouplingConfig,
) -> Result<CoupledSample, CouplingError> {
    let mut rng = stream_rng(seed, 0);
    sample_block_coupling_with(model, schedule, depth, tail_x, tail_y, config, &mut rng)
}

pub fn sample_block_coupling_with<R: Rng + ?Sized>(
    model: &GModel,
    schedule: &BlockSchedule,
    depth: usize,
    tail_x: &Word,
    tail_y: &Word,
    config: &CouplingConfig,
    rng: &mut R,
) -> Result<CoupledSample, CouplingError> {
    if !model.is_positive() {
        return Err(GModelError::NonPositive.into());
    }
    check_tail(model, tail_x)?;
    check_tail(model, tail_y)?;
    let base = model.alphabet().size();
    let mut state = CouplingState::new();
    let mut blocks = Vec::new();
    let mut max_err = 0.0f64;
    let mut xb = Vec::new();
    let mut yb = Vec::new();
    while state.depth() <= depth {
        let interval = next_block(&state, schedule);
        let b = interval.len();
        if b > config.block_cap {
            return Err(CouplingError::BlockTooLong {
                len: b,
                cap: config.block_cap,
            });
        }
        let dx = model.block_distribution(b, &state.context(false, tail_x.symbols()));
        let dy = model.block_distribution(b, &state.context(true, tail_y.symbols()));
        let err = 0.5 * (dx.total_error() + dy.total_error());
        if err > config.truncation_tolerance {
            return Err(CouplingError::Truncation {
                error: err,
                tolerance: config.truncation_tolerance,
            });
        }
        max_err = max_err.max(err);
        let plan = MaximalCoupling::from_weights(&normalized(dx.probs), &normalized(dy.probs));
        let (i, j) = plan.sample(rng);
        xb.resize(b, 0);
        yb.resize(b, 0);
        lex_decode(i, base, b, &mut xb);
        lex_decode(j, base, b, &mut yb);
        let run_before = state.agreement_run();
        state.push(&xb, &yb);
        blocks.push(BlockRecord {
            interval,
            run_before,
            agreed: i == j,
            truncation_error: err,
        });
    }
    let (x, y) = (state.x(), state.y());
    let disagree = (0..=depth as i64)
        .map(|n| x.at(-n) != y.at(-n))
        .collect();
    Ok(CoupledSample {
        x,
        y,
        disagree,
        blocks,
        max_truncation_error: max_err,
    })
}

/// Aggregated Monte Carlo statistics of the block coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct DisagreementEstimate {
    pub trajectories: u64,
    /// Disagreement counts at coordinate `-n`, `n = 0..=depth`.
    pub coordinate_counts: Vec<u64>,
    /// Blocks drawn with agreement run `k` before them.
    pub run_blocks: Vec<u64>,
    /// Of those, how many disagreed.
    pub run_disagreements: Vec<u64>,
    pub max_truncation_error: f64,
}

impl DisagreementEstimate {
    fn empty(depth: usize) -> Self {
        Self {
            trajectories: 0,
            coordinate_counts: vec![0; depth + 1],
            run_blocks: Vec::new(),
            run_disagreements: Vec::new(),
            max_truncation_error: 0.0,
        }
    }

    fn add(&mut self, s: &CoupledSample) {
        self.trajectories += 1;
        for (c, &d) in self.coordinate_counts.iter_mut().zip(&s.disagree) {
            *c += d as u64;
        }
        for r in &s.blocks {
            if self.run_blocks.len() <= r.run_before {
                self.run_blocks.resize(r.run_before + 1, 0);
                self.run_disagreements.resize(r.run_before + 1, 0);
            }
            self.run_blocks[r.run_before] += 1;
            self.run_disagreements[r.run_before] += (!r.agreed) as u64;
        }
        self.max_truncation_error = self.max_truncation_error.max(s.max_truncation_error);
    }

    fn merge(mut self, other: Self) -> Self {
        self.trajectories += other.trajectories;
        for (a, b) in self.coordinate_counts.iter_mut().zip(&other.coordinate_counts) {
            *a += b;
        }
        let n = self.run_blocks.len().max(other.run_blocks.len());
        self.run_blocks.resize(n, 0);
        self.run_disagreements.resize(n, 0);
        for (k, (&b, &d)) in other.run_blocks.iter().zip(&other.run_disagreements).enumerate() {
            self.run_blocks[k] += b;
            self.run_disagreements[k] += d;
        }
        self.max_truncation_error = self.max_truncation_error.max(other.max_truncation_error);
        self
    }

    pub fn depth(&self) -> usize {
        self.coordinate_counts.len() - 1
    }

    /// Empirical `P(x_{-n} ≠ y_{-n})`.
    pub fn frequency(&self, n: usize) -> f64 {
        self.coordinate_counts[n] as f64 / self.trajectories as f64
    }

    /// Binomial standard error of [`Self::frequency`].
    pub fn stderr(&self, n: usize) -> f64 {
        binomial_stderr(self.frequency(n), self.trajectories)
    }

    /// Empirical disagreement frequency of blocks drawn after `k`
    /// agreeing blocks, with its standard error; `None` if no such block.
    pub fn run_frequency(&self, k: usize) -> Option<(f64, f64)> {
        let n = *self.run_blocks.get(k)?;
        if n == 0 {
            return None;
        }
        let p = self.run_disagreements[k] as f64 / n as f64;
        Some((p, binomial_stderr(p, n)))
    }
}

fn binomial_stderr(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Runs `trajectories` independent copies of the block coupling in
/// parallel; trajectory `i` uses stream `i` of `master_seed`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_disagreement(
    model: &GModel,
    schedule: &BlockSchedule,
    depth: usize,
    tail_x: &Word,
    tail_y: &Word,
    trajectories: u64,
    master_seed: u64,
    config: &CouplingConfig,
) -> Result<DisagreementEstimate, CouplingError> {
    (0..trajectories)
        .into_par_iter()
        .try_fold(
            || DisagreementEstimate::empty(depth),
            |mut acc, i| {
                let mut rng = stream_rng(master_seed, i);
                let s = sample_block_coupling_with(
                    model, schedule, depth, tail_x, tail_y, config, &mut rng,
                )?;
                acc.add(&s);
                Ok(acc)
            },
        )
        .try_reduce(|| DisagreementEstimate::empty(depth), |a, b| Ok(a.merge(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmodel::{Alphabet, CoefficientLaw, FiniteMemory, LongRangeLinear};
    use crate::transfer::TransferOperator;

    fn markov_fm() -> FiniteMemory {
        // g(x0 | x1): P(0|0)=0.8, P(0|1)=0.3
        FiniteMemory::new(Alphabet::binary(), 1, vec![0.8, 0.3, 0.2, 0.7]).unwrap()
    }

    fn markov() -> GModel {
        markov_fm().into()
    }

    fn long_range() -> GModel {
        LongRangeLinear::binary(0.25, CoefficientLaw::power_normalized_p2(0.5))
            .unwrap()
            .into()
    }

    #[test]
    fn iid_model_never_disagrees() {
        let m: GModel = FiniteMemory::iid(Alphabet::binary(), vec![0.3, 0.7])
            .unwrap()
            .into();
        let s = BlockSchedule::constant(2).unwrap();
        let tail = Word::new(1, vec![0, 1]);
        let est = estimate_disagreement(&m, &s, 20, &tail, &tail, 200, 1, &Default::default())
            .unwrap();
        assert!(est.coordinate_counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn memory_covered_contexts_always_agree() {
        let m: GModel = FiniteMemory::from_fn(Alphabet::binary(), 2, |w| {
            let p0 = [0.2, 0.5, 0.6, 0.9][w[1] * 2 + w[2]];
            if w[0] == 0 {
                p0
            } else {
                1.0 - p0
            }
        })
        .unwrap()
        .into();
        let s = BlockSchedule::explicit(vec![1, 3]).unwrap();
        let tx = Word::new(1, vec![1, 0, 1, 1]);
        let ty = Word::new(1, vec![1, 0, 0, 0]);
        let est = estimate_disagreement(&m, &s, 30, &tx, &ty, 300, 2, &Default::default()).unwrap();
        assert!(est.coordinate_counts.iter().all(|&c| c == 0));
        assert_eq!(est.max_truncation_error, 0.0);
    }

    #[test]
    fn block_too_long_is_reported() {
        let s = BlockSchedule::constant(13).unwrap();
        let t = Word::empty(1);
        let err = sample_block_coupling(&markov(), &s, 3, &t, &t, 0, &Default::default());
        assert!(matches!(err, Err(CouplingError::BlockTooLong { len: 13, cap: 12 })));
    }

    #[test]
    fn truncation_tolerance_is_enforced() {
        let s = BlockSchedule::constant(1).unwrap();
        let t = Word::empty(1);
        let cfg = CouplingConfig {
            truncation_tolerance: 1e-6,
            ..Default::default()
        };
        let err = sample_block_coupling(&long_range(), &s, 3, &t, &t, 0, &cfg);
        assert!(matches!(err, Err(CouplingError::Truncation { .. })));
    }

    #[test]
    fn misplaced_tail_is_rejected() {
        let s = BlockSchedule::constant(1).unwrap();
        let t = Word::new(0, vec![1]);
        let err = sample_block_coupling(&markov(), &s, 3, &t, &t, 0, &Default::default());
        assert!(matches!(err, Err(CouplingError::InvalidTail(_))));
    }

    #[test]
    fn covers_requested_depth_and_is_reproducible() {
        let s = BlockSchedule::explicit(vec![1, 2, 4]).unwrap();
        let tx = Word::new(1, vec![0; 8]);
        let ty = Word::new(1, vec![1; 8]);
        let cfg = CouplingConfig::default();
        let a = sample_block_coupling(&long_range(), &s, 25, &tx, &ty, 9, &cfg).unwrap();
        let b = sample_block_coupling(&long_range(), &s, 25, &tx, &ty, 9, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.x.len() > 25);
        assert_eq!(a.x.interval().end, 0);
        assert_eq!(a.disagree.len(), 26);
        let covered: usize = a.blocks.iter().map(|r| r.interval.len()).sum();
        assert_eq!(covered, a.x.len());
    }

    #[test]
    fn parallel_estimate_is_deterministic() {
        let s = BlockSchedule::constant(1).unwrap();
        let tx = Word::new(1, vec![0; 8]);
        let ty = Word::new(1, vec![1; 8]);
        let cfg = CouplingConfig::default();
        let a = estimate_disagreement(&long_range(), &s, 10, &tx, &ty, 500, 3, &cfg).unwrap();
        let b = estimate_disagreement(&long_range(), &s, 10, &tx, &ty, 500, 3, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trajectories, 500);
    }

    #[test]
    fn each_side_has_the_model_marginal() {
        // x_0 follows the one-step kernel from the tail; x_{-8} is close to
        // stationary.
        let m = markov();
        let s = BlockSchedule::explicit(vec![1, 2]).unwrap();
        let tx = Word::new(1, vec![0]);
        let ty = Word::new(1, vec![1]);
        let n = 40_000u64;
        let mut ones_x0 = 0u64;
        let mut ones_y0 = 0u64;
        let mut ones_x8 = 0u64;
        let cfg = CouplingConfig::default();
        for i in 0..n {
            let mut rng = stream_rng(11, i);
            let c = sample_block_coupling_with(&m, &s, 8, &tx, &ty, &cfg, &mut rng).unwrap();
            ones_x0 += c.x.at(0).unwrap() as u64;
            ones_y0 += c.y.at(0).unwrap() as u64;
            ones_x8 += c.x.at(-8).unwrap() as u64;
        }
        let sd = (0.25 / n as f64).sqrt();
        // P(x_0 = 1 | x_1 = 0) = 0.2, P(y_0 = 1 | y_1 = 1) = 0.7
        assert!((ones_x0 as f64 / n as f64 - 0.2).abs() < 5.0 * sd);
        assert!((ones_y0 as f64 / n as f64 - 0.7).abs() < 5.0 * sd);
        let pi = TransferOperator::new(markov_fm()).unwrap().stationary(1e-13).unwrap();
        let p1 = pi.prob(&[1]);
        assert!((ones_x8 as f64 / n as f64 - p1).abs() < 5.0 * sd + 1e-3);
    }
}
