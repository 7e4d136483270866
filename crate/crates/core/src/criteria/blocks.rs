use serde::Serialize;

use super::hellinger::{as1_constant, tv_upper_rg2, RG2_RHO_MAX};
use super::{CriteriaError, VariationModel};
use crate::coupling::{dbar, BlockSchedule, TailRule};

/// Windows longer than this are bounded through tail sums instead of
/// site-by-site products.
const WINDOW_ENUMERATION_LIMIT: usize = 1 << 20;

/// Schedule with `B_n = ⌈lⁿ/(l-1)⌉`, the first `count` lengths tabulated.
///
/// The lengths satisfy `⌊l^{n-1}⌋ ≤ b_n ≤ ⌈l^{n-1}⌉` for `n ≥ 2`, since
/// consecutive values of `lⁿ/(l-1)` differ by `l^{n-1}`.
pub fn thmc_blocks(l: f64, count: usize) -> Result<BlockSchedule, CriteriaError> {
    let geometric = BlockSchedule::geometric(l)?;
    let prefix = geometric.lengths(count);
    for (i, &b) in prefix.iter().enumerate().skip(1) {
        let x = l.powi(i as i32);
        let slack = 1e-9 * x;
        assert!(
            (x - slack).floor() <= b as f64 && b as f64 <= (x + slack).ceil(),
            "b_{} = {b} outside [⌊l^{i}⌋, ⌈l^{i}⌉]",
            i + 1
        );
    }
    Ok(BlockSchedule::with_tail(prefix, TailRule::Geometric { l })?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioRow {
    pub k: usize,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

/// `R_K = [Σ_{k≤K} b_k d_k Π_{j<k}(1-d_j) + b_{K+1} Π_{j≤K}(1-d_j)]
///        / Σ_{k≤K+1} b_k Π_{j<k}(1-d_j)` for each `K` in the sweep.
pub fn thm_g_ratio(d: &[f64], b: &[usize], k_sweep: &[usize]) -> Result<Vec<RatioRow>, CriteriaError> {
    if d.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(CriteriaError::OutOfDomain("d values outside [0, 1]".into()));
    }
    k_sweep
        .iter()
        .map(|&k| {
            if d.len() < k || b.len() < k + 1 {
                return Err(CriteriaError::OutOfDomain(format!(
                    "K = {k} needs {k} d values and {} block lengths",
                    k + 1
                )));
            }
            let mut survive = 1.0;
            let mut numerator = 0.0;
            let mut denominator = 0.0;
            for i in 0..k {
                numerator += b[i] as f64 * d[i] * survive;
                denominator += b[i] as f64 * survive;
                survive *= 1.0 - d[i];
            }
            numerator += b[k] as f64 * survive;
            denominator += b[k] as f64 * survive;
            Ok(RatioRow {
                k,
                numerator,
                denominator,
                ratio: numerator / denominator,
            })
        })
        .collect()
}

/// Upper bounds on `d_n(g, B)` from the variation profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorollaryBounds {
    pub n: usize,
    /// Sites `i` whose ratios `ρ_[0,i]` enter: `B_{n-1} ..= B_n - 1`.
    pub window: (usize, usize),
    /// `sqrt(1 - Π(1 - ½(√ρ_i - 1)²)²)`, when every `ρ_i ≤ (1+√2)²`.
    pub rg2: Option<f64>,
    /// `sqrt(Σ((log ρ_i)²/4 + K(λ)(log ρ_i)³))`, when every `ρ_i ≤ λ`.
    pub as_bound: Option<f64>,
}

impl CorollaryBounds {
    /// Smallest available bound, `1` if none applies.
    pub fn best(&self) -> f64 {
        [self.rg2, self.as_bound]
            .into_iter()
            .flatten()
            .fold(1.0, f64::min)
    }
}

fn as_sum_from(vm: &VariationModel, start: usize, k: f64) -> Option<f64> {
    Some(0.25 * vm.power_sum_from(start, 2.0)? + k * vm.power_sum_from(start, 3.0)?)
}

/// Both corollary bounds for block `n ≥ 1` of `schedule`.
///
/// The variation model must dominate `log ρ_[0,i]` and be non-increasing
/// from the window start on.
pub fn dn_upper_cor(
    vm: &VariationModel,
    schedule: &BlockSchedule,
    n: usize,
    lambda: f64,
) -> Result<CorollaryBounds, CriteriaError> {
    if n == 0 {
        return Err(CriteriaError::OutOfDomain("blocks are indexed from 1".into()));
    }
    let k = as1_constant(lambda)?;
    let start = schedule.B(n - 1);
    let end = schedule.B(n) - 1;
    let first = vm.rho(start);
    let (rg2, as_bound) = if end - start < WINDOW_ENUMERATION_LIMIT {
        let rhos: Vec<f64> = (start..=end).map(|i| vm.rho(i)).collect();
        let rg2 = if rhos.iter().all(|&r| r <= RG2_RHO_MAX) {
            Some(tv_upper_rg2(&rhos)?)
        } else {
            None
        };
        let as_bound = rhos.iter().all(|&r| r <= lambda).then(|| {
            let s: f64 = rhos
                .iter()
                .map(|r| {
                    let l = r.ln();
                    0.25 * l * l + k * l * l * l
                })
                .sum();
            s.min(1.0).sqrt()
        });
        (rg2, as_bound)
    } else {
        let as_bound = if first <= lambda {
            as_sum_from(vm, start, k).map(|s| s.min(1.0).sqrt())
        } else {
            None
        };
        (None, as_bound)
    };
    Ok(CorollaryBounds {
        n,
        window: (start, end),
        rg2,
        as_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DbarBounds {
    /// Bounds on `d_1, ..., d_H`.
    pub d: Vec<f64>,
    /// Bound on every `d_n`, `n > H`.
    pub tail: f64,
    /// `d̄_n = max(sup_{n≤i≤H} d_i, tail)`.
    pub dbar: Vec<f64>,
}

/// `d̄` up to `horizon` from the corollary bounds, with the tail beyond
/// `horizon` bounded by `sqrt(Σ_{j≥B_H}((log ρ_j)²/4 + K(log ρ_j)³))`.
///
/// `extra` optionally supplies other bounds on `d_1, ...` (e.g. exhaustive
/// enumeration); the smaller bound is kept.
pub fn corollary_dbar(
    vm: &VariationModel,
    schedule: &BlockSchedule,
    horizon: usize,
    lambda: f64,
    extra: Option<&[f64]>,
) -> Result<DbarBounds, CriteriaError> {
    let k = as1_constant(lambda)?;
    let mut d = Vec::with_capacity(horizon);
    for n in 1..=horizon {
        let mut v = dn_upper_cor(vm, schedule, n, lambda)?.best();
        if let Some(&e) = extra.and_then(|x| x.get(n - 1)) {
            v = v.min(e);
        }
        d.push(v);
    }
    let start = schedule.B(horizon);
    let tail = if vm.rho(start) <= lambda {
        as_sum_from(vm, start, k).map_or(1.0, |s| s.min(1.0).sqrt())
    } else {
        1.0
    };
    let dbar = dbar(&d, tail);
    Ok(DbarBounds { d, tail, dbar })
}
