//! Renewal sequences bounding coupling disagreement.
//!
//! A two-state block chain `P̃` is grown leftward from 0. After `k < K`
//! agreeing blocks the next block has length `b_{k+1}` and disagrees with
//! probability `d_{k+1}`; after `K` agreeing blocks the block of length
//! `b_{K+1}` is counted as disagreeing. A disagreeing block resets the run.
//! `u_n = P̃(coordinate -n lies in a disagreeing block)` solves
//! `u_n = Σ_{i=1}^{n} α_i u_{n-i} + β_n`, where `α_i` is the law of the cycle
//! length and `β_n` the probability that the first cycle covers `-n` with a
//! disagreeing block.

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::coupling::BlockSchedule;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenewalError {
    #[error("invalid renewal spec: {0}")]
    InvalidSpec(String),
    #[error("renewal sequence has no mean cycle length")]
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenewalSpec {
    /// `d_1, ..., d_K` (longer input is truncated).
    pub d: Vec<f64>,
    /// `b_1, ..., b_{K+1}`.
    pub b: Vec<usize>,
    pub k: usize,
}

impl RenewalSpec {
    pub fn new(d: Vec<f64>, b: Vec<usize>, k: usize) -> Result<Self, RenewalError> {
        let spec = Self { d, b, k };
        spec.validate()?;
        Ok(spec)
    }

    /// Spec for level `k` with block lengths taken from `schedule`.
    pub fn from_schedule(d: &[f64], schedule: &BlockSchedule, k: usize) -> Result<Self, RenewalError> {
        if d.len() < k {
            return Err(RenewalError::InvalidSpec(format!(
                "{} values of d for K = {k}",
                d.len()
            )));
        }
        Self::new(d[..k].to_vec(), schedule.lengths(k + 1), k)
    }

    pub fn validate(&self) -> Result<(), RenewalError> {
        let bad = |m: String| Err(RenewalError::InvalidSpec(m));
        if self.d.len() < self.k {
            return bad(format!("{} values of d for K = {}", self.d.len(), self.k));
        }
        if self.b.len() < self.k + 1 {
            return bad(format!("{} block lengths for K = {}", self.b.len(), self.k));
        }
        let d = &self.d[..self.k];
        if let Some(v) = d.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return bad(format!("d value {v} outside [0, 1]"));
        }
        if d.windows(2).any(|w| w[1] > w[0]) {
            return bad("d must be non-increasing".into());
        }
        if self.b[..=self.k].contains(&0) {
            return bad("block length 0".into());
        }
        Ok(())
    }

    /// `B_1, ..., B_{K+1}`.
    pub fn partial_sums(&self) -> Vec<usize> {
        self.b[..=self.k]
            .iter()
            .scan(0, |acc, &b| {
                *acc += b;
                Some(*acc)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaBeta {
    /// `alpha[i]` for `i = 0..=B_{K+1}` (`alpha[0] = 0`).
    pub alpha: Vec<f64>,
    /// `beta[n]` for `n = 0..B_{K+1}`; zero beyond.
    pub beta: Vec<f64>,
    pub period: usize,
    support: Vec<usize>,
}

impl AlphaBeta {
    pub fn alpha(&self, i: usize) -> f64 {
        self.alpha.get(i).copied().unwrap_or(0.0)
    }

    pub fn beta(&self, n: usize) -> f64 {
        self.beta.get(n).copied().unwrap_or(0.0)
    }

    /// Indices with `α_i > 0`.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// `Σ i α_i`, the mean cycle length.
    pub fn mean_cycle(&self) -> f64 {
        self.alpha.iter().enumerate().map(|(i, a)| i as f64 * a).sum()
    }
}

pub fn build_alphabeta(spec: &RenewalSpec) -> Result<AlphaBeta, RenewalError> {
    spec.validate()?;
    let k = spec.k;
    let partial = spec.partial_sums();
    let top = partial[k];
    let mut alpha = vec![0.0; top + 1];
    let mut beta = vec![0.0; top];
    let mut survive = 1.0;
    let mut start = 0;
    for (idx, &end) in partial.iter().enumerate() {
        // block idx+1 covers [start, end)
        let mass = if idx < k {
            let m = spec.d[idx] * survive;
            survive *= 1.0 - spec.d[idx];
            m
        } else {
            survive
        };
        alpha[end] += mass;
        beta[start..end].iter_mut().for_each(|v| *v = mass);
        start = end;
    }
    let support: Vec<usize> = (1..=top).filter(|&i| alpha[i] > 0.0).collect();
    let period = support.iter().fold(0usize, |g, &i| g.gcd(&i));
    if period == 0 {
        return Err(RenewalError::Degenerate);
    }
    Ok(AlphaBeta {
        alpha,
        beta,
        period,
        support,
    })
}

/// gcd of the indices carrying positive `α`.
pub fn period(ab: &AlphaBeta) -> usize {
    ab.period
}

/// `u_0, ..., u_{n_max}` from `u_n = Σ_{i=1}^{n} α_i u_{n-i} + β_n`.
pub fn renewal_solve(ab: &AlphaBeta, n_max: usize) -> Vec<f64> {
    let mut u = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let conv: f64 = ab
            .support
            .iter()
            .take_while(|&&i| i <= n)
            .map(|&i| ab.alpha[i] * u[n - i])
            .sum();
        u.push(conv + ab.beta(n));
    }
    u
}

/// `lim_n u_{mn} = m Σ_j β_{mj} / Σ_i i α_i` along multiples of the period.
pub fn renewal_limit(ab: &AlphaBeta) -> Result<f64, RenewalError> {
    residue_limit(ab, 0)
}

/// `lim_n u_{mn+r}` for `0 ≤ r < m`.
pub fn residue_limit(ab: &AlphaBeta, r: usize) -> Result<f64, RenewalError> {
    let mean = ab.mean_cycle();
    if !(mean > 0.0) {
        return Err(RenewalError::Degenerate);
    }
    let m = ab.period;
    let s: f64 = ab.beta.iter().skip(r % m).step_by(m).sum();
    Ok(m as f64 * s / mean)
}

/// `Σ β_n / Σ i α_i`: the Cesàro limit of `u_n`. Equals [`renewal_limit`]
/// whenever every `B_k` is a multiple of the period.
pub fn mean_limit(ab: &AlphaBeta) -> Result<f64, RenewalError> {
    let mean = ab.mean_cycle();
    if !(mean > 0.0) {
        return Err(RenewalError::Degenerate);
    }
    Ok(ab.beta.iter().sum::<f64>() / mean)
}

/// `limsup_n u_n`: the largest residue-class limit.
pub fn limsup_limit(ab: &AlphaBeta) -> Result<f64, RenewalError> {
    (0..ab.period).try_fold(0.0f64, |acc, r| Ok(acc.max(residue_limit(ab, r)?)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropositionRow {
    pub k: usize,
    /// `[Σ_{k≤K} b_k d_k Π_{j<k}(1-d_j) + b_{K+1} Π_{j≤K}(1-d_j)] / Σ_{k≤K+1} b_k Π_{j<k}(1-d_j)`.
    pub bound: f64,
    pub renewal_limit: f64,
    pub limsup: f64,
    pub period: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropositionBound {
    pub rows: Vec<PropositionRow>,
    pub best: Option<PropositionRow>,
}

/// Limiting disagreement bound of the block coupling for each `K` in the
/// sweep, from a non-increasing `d̄` and the schedule's block lengths.
pub fn proposition_bound(
    schedule: &BlockSchedule,
    dbar: &[f64],
    k_sweep: &[usize],
) -> Result<PropositionBound, RenewalError> {
    let rows = k_sweep
        .par_iter()
        .map(|&k| {
            let spec = RenewalSpec::from_schedule(dbar, schedule, k)?;
            let ab = build_alphabeta(&spec)?;
            Ok(PropositionRow {
                k,
                bound: mean_limit(&ab)?,
                renewal_limit: renewal_limit(&ab)?,
                limsup: limsup_limit(&ab)?,
                period: ab.period,
            })
        })
        .collect::<Result<Vec<_>, RenewalError>>()?;
    let best = rows
        .iter()
        .copied()
        .min_by(|a, b| a.bound.total_cmp(&b.bound));
    Ok(PropositionBound { rows, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(d: &[f64], b: &[usize], k: usize) -> RenewalSpec {
        RenewalSpec::new(d.to_vec(), b.to_vec(), k).unwrap()
    }

    /// Forward probability flow over (block start, agreement run).
    fn chain_dp(spec: &RenewalSpec, n_max: usize) -> Vec<f64> {
        let k = spec.k;
        let mut mass = vec![vec![0.0; k + 1]; n_max + 1];
        let mut u = vec![0.0; n_max + 1];
        mass[0][0] = 1.0;
        for pos in 0..=n_max {
            for run in 0..=k {
                let p = mass[pos][run];
                if p == 0.0 {
                    continue;
                }
                let len = spec.b[run];
                let dis = if run < k { spec.d[run] } else { 1.0 };
                for v in u.iter_mut().skip(pos).take(len) {
                    *v += p * dis;
                }
                if pos + len <= n_max {
                    mass[pos + len][0] += p * dis;
                    if run < k {
                        mass[pos + len][run + 1] += p * (1.0 - dis);
                    }
                }
            }
        }
        u
    }

    /// Literal sum over all block outcome sequences covering `[0, n_max]`.
    fn paths(spec: &RenewalSpec, n_max: usize) -> Vec<f64> {
        fn go(spec: &RenewalSpec, pos: usize, run: usize, p: f64, n_max: usize, u: &mut [f64]) {
            if pos > n_max || p == 0.0 {
                return;
            }
            let len = spec.b[run];
            let dis = if run < spec.k { spec.d[run] } else { 1.0 };
            for v in u.iter_mut().skip(pos).take(len) {
                *v += p * dis;
            }
            go(spec, pos + len, 0, p * dis, n_max, u);
            if run < spec.k {
                go(spec, pos + len, run + 1, p * (1.0 - dis), n_max, u);
            }
        }
        let mut u = vec![0.0; n_max + 1];
        go(spec, 0, 0, 1.0, n_max, &mut u);
        u
    }

    #[test]
    fn always_disagreeing_first_block() {
        let ab = build_alphabeta(&spec(&[1.0], &[1, 1], 1)).unwrap();
        assert_eq!(ab.alpha, vec![0.0, 1.0, 0.0]);
        assert_eq!(ab.beta, vec![1.0, 0.0]);
        assert!(renewal_solve(&ab, 20).iter().all(|&u| u == 1.0));
    }

    #[test]
    fn zero_disagreement_forces_the_last_block() {
        let s = spec(&[0.0, 0.0], &[1, 2, 3], 2);
        let ab = build_alphabeta(&s).unwrap();
        assert_eq!(ab.support(), &[6]);
        assert_eq!(ab.beta, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let u = renewal_solve(&ab, 30);
        assert_eq!(u, chain_dp(&s, 30));
        // periodic with period 6: ones exactly on [3, 6) + 6ℕ
        for (n, &v) in u.iter().enumerate() {
            assert_eq!(v, if n % 6 >= 3 { 1.0 } else { 0.0 });
        }
        assert_eq!(renewal_limit(&ab).unwrap(), 0.0);
        assert_eq!(mean_limit(&ab).unwrap(), 0.5);
        assert_eq!(limsup_limit(&ab).unwrap(), 1.0);
    }

    #[test]
    fn hand_limit() {
        let ab = build_alphabeta(&spec(&[0.5], &[2, 2], 1)).unwrap();
        assert_eq!(ab.period, 2);
        assert!((renewal_limit(&ab).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((mean_limit(&ab).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let u = renewal_solve(&ab, 200);
        assert!((u[200] - 2.0 / 3.0).abs() < 1e-12);
        assert!((u[199] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unit_blocks_give_reciprocal_series() {
        let d = [0.6, 0.3, 0.2];
        let ab = build_alphabeta(&spec(&d, &[1; 4], 3)).unwrap();
        let expected = 1.0 / (1.0 + 0.4 + 0.4 * 0.7 + 0.4 * 0.7 * 0.8);
        assert!((renewal_limit(&ab).unwrap() - expected).abs() < 1e-14);
        assert!((mean_limit(&ab).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn periods() {
        let ab = build_alphabeta(&spec(&[0.5, 0.5], &[3, 3, 3], 2)).unwrap();
        assert_eq!(ab.support(), &[3, 6, 9]);
        assert_eq!(period(&ab), 3);
        let ab = build_alphabeta(&spec(&[0.5, 0.5], &[2, 2, 2], 2)).unwrap();
        assert_eq!(period(&ab), 2);
        let ab = build_alphabeta(&spec(&[0.2], &[1, 5], 1)).unwrap();
        assert_eq!(period(&ab), 1);
    }

    #[test]
    fn invalid_specs() {
        assert!(RenewalSpec::new(vec![0.2, 0.5], vec![1, 1, 1], 2).is_err());
        assert!(RenewalSpec::new(vec![1.5], vec![1, 1], 1).is_err());
        assert!(RenewalSpec::new(vec![0.5], vec![1], 1).is_err());
        assert!(RenewalSpec::new(vec![0.5], vec![1, 0], 1).is_err());
        assert!(RenewalSpec::new(vec![], vec![1], 1).is_err());
    }

    #[test]
    fn k_zero_is_deterministic() {
        let ab = build_alphabeta(&spec(&[], &[3], 0)).unwrap();
        assert!(renewal_solve(&ab, 10).iter().all(|&u| u == 1.0));
    }

    #[test]
    fn proposition_sweep_uses_schedule() {
        let s = BlockSchedule::constant(1).unwrap();
        let dbar = [0.5, 0.4, 0.3, 0.2];
        let out = proposition_bound(&s, &dbar, &[1, 2, 3, 4]).unwrap();
        assert_eq!(out.rows.len(), 4);
        for row in &out.rows {
            let prod: f64 = (0..=row.k)
                .map(|k| dbar[..k].iter().map(|d| 1.0 - d).product::<f64>())
                .sum();
            assert!((row.bound - 1.0 / prod).abs() < 1e-14);
            assert_eq!(row.bound, row.limsup);
        }
        assert_eq!(out.best.unwrap().k, 4);
        assert!(proposition_bound(&s, &dbar, &[5]).is_err());
    }

    #[test]
    fn oracles_agree_on_a_grid() {
        let levels = [0.0, 0.25, 0.5, 1.0];
        for k in 1..=3usize {
            for bs in 0..4usize.pow(k as u32 + 1) {
                let b: Vec<usize> = (0..=k).map(|i| (bs / 4usize.pow(i as u32)) % 4 + 1).collect();
                for ds in 0..4usize.pow(k as u32) {
                    let mut d: Vec<f64> =
                        (0..k).map(|i| levels[(ds / 4usize.pow(i as u32)) % 4]).collect();
                    if d.windows(2).any(|w| w[1] > w[0]) {
                        continue;
                    }
                    d.truncate(k);
                    let s = spec(&d, &b, k);
                    let top = s.partial_sums()[k];
                    let u = renewal_solve(&build_alphabeta(&s).unwrap(), 4 * top);
                    let dp = chain_dp(&s, 4 * top);
                    for (a, o) in u.iter().zip(&dp) {
                        assert!((a - o).abs() < 1e-12, "{s:?}");
                    }
                    if top <= 6 {
                        let lit = paths(&s, 2 * top);
                        for (a, o) in u.iter().zip(&lit) {
                            assert!((a - o).abs() < 1e-12, "{s:?}");
                        }
                    }
                }
            }
        }
    }

    fn arb_spec() -> impl Strategy<Value = RenewalSpec> {
        (1usize..=4).prop_flat_map(|k| {
            (
                prop::collection::vec(0.0f64..=1.0, k),
                prop::collection::vec(1usize..=5, k + 1),
            )
                .prop_map(move |(mut d, b)| {
                    d.sort_by(|a, c| c.total_cmp(a));
                    RenewalSpec::new(d, b, k).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn alpha_telescopes(s in arb_spec()) {
            let ab = build_alphabeta(&s).unwrap();
            prop_assert!((ab.alpha.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(ab.alpha.iter().chain(&ab.beta).all(|&v| v >= 0.0));
            let partial = s.partial_sums();
            for (i, &a) in ab.alpha.iter().enumerate() {
                if a > 0.0 {
                    prop_assert!(partial.contains(&i));
                    prop_assert_eq!(i % ab.period, 0);
                }
            }
        }

        #[test]
        fn solution_is_a_probability_and_matches_the_chain(s in arb_spec()) {
            let ab = build_alphabeta(&s).unwrap();
            let n = 6 * s.partial_sums()[s.k];
            let u = renewal_solve(&ab, n);
            let dp = chain_dp(&s, n);
            for (a, o) in u.iter().zip(&dp) {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(a));
                prop_assert!((a - o).abs() < 1e-12);
            }
        }

        #[test]
        fn residue_limits_average_to_the_mean(s in arb_spec()) {
            let ab = build_alphabeta(&s).unwrap();
            let m = ab.period;
            let avg: f64 = (0..m).map(|r| residue_limit(&ab, r).unwrap()).sum::<f64>() / m as f64;
            prop_assert!((avg - mean_limit(&ab).unwrap()).abs() < 1e-12);
        }
    }
}
