use rayon::prelude::*;

use super::maximal::total_variation;
use super::schedule::BlockSchedule;
use super::CouplingError;
use crate::gmodel::{lex_decode, GModel};

/// Default cap on `|S|^{B_{n-1} + 2L + b_n}` for [`dn_bruteforce`].
pub const DN_BUDGET: usize = 1 << 22;

/// Enclosure of `d_n(g, B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DnBounds {
    /// Largest TV over the enumerated configurations.
    pub lower: f64,
    /// `lower` plus the worst truncation error of the enumerated conditionals.
    pub upper: f64,
    pub configurations: usize,
}

/// Sup over pairs agreeing on `[-B_{n-1}+1, 0]` of the TV between the two
/// conditional laws of the block `J_n`, found by enumerating the agreeing
/// part and every pair of tails on `[1, L]`.
///
/// For each configuration the two conditionals are evaluated with the
/// context cut after `L` tail symbols; the per-word errors of that cut,
/// halved and summed over both sides, bound how far the TV can move under
/// any continuation of the tails.
pub fn dn_bruteforce(
    model: &GModel,
    schedule: &BlockSchedule,
    n: usize,
    tail_len: usize,
    budget: usize,
) -> Result<DnBounds, CouplingError> {
    if n == 0 {
        return Err(CouplingError::InvalidSchedule("d_n is indexed from 1".into()));
    }
    let base = model.alphabet().size();
    let shared = schedule.B(n - 1);
    let b = schedule.b(n);
    let exponent = shared + 2 * tail_len + b;
    let states = u32::try_from(exponent)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .unwrap_or(usize::MAX);
    if states > budget {
        return Err(CouplingError::Budget { states, budget });
    }
    let shared_count = base.pow(shared as u32);
    let tail_count = base.pow(tail_len as u32);

    let per_shared: Vec<(f64, f64, usize)> = (0..shared_count)
        .into_par_iter()
        .map(|s| {
            let mut ctx = vec![0usize; shared + tail_len];
            lex_decode(s, base, shared, &mut ctx[..shared]);
            let dists: Vec<(Vec<f64>, f64)> = (0..tail_count)
                .map(|t| {
                    lex_decode(t, base, tail_len, &mut ctx[shared..]);
                    let d = model.block_distribution(b, &ctx);
                    let err = d.total_error();
                    (d.probs, err)
                })
                .collect();
            let mut lower = 0.0f64;
            let mut upper = 0.0f64;
            let mut configs = 0usize;
            for i in 0..tail_count {
                for j in i..tail_count {
                    let tv = total_variation(&dists[i].0, &dists[j].0);
                    lower = lower.max(tv);
                    upper = upper.max(tv + 0.5 * (dists[i].1 + dists[j].1));
                    configs += 1;
                }
            }
            (lower, upper, configs)
        })
        .collect();

    let (lower, upper, configurations) = per_shared
        .into_iter()
        .fold((0.0f64, 0.0f64, 0usize), |(l, u, c), (l2, u2, c2)| {
            (l.max(l2), u.max(u2), c + c2)
        });
    Ok(DnBounds {
        lower,
        upper: upper.max(lower).min(1.0),
        configurations,
    })
}

/// `d̄_n = max(sup_{i≥n} d_i, tail_bound)` over the tabulated range.
pub fn dbar(d_values: &[f64], tail_bound: f64) -> Vec<f64> {
    let mut out = vec![0.0; d_values.len()];
    let mut running = tail_bound;
    for (o, &d) in out.iter_mut().zip(d_values).rev() {
        running = running.max(d);
        *o = running;
    }
    out
}
