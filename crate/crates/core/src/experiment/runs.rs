use serde::Serialize;

use super::output::{fmt_f64 as f, Outputs};
use super::{ExperimentConfig, ExperimentError};
use crate::coupling::{dn_bruteforce, estimate_disagreement, BlockSchedule, DisagreementEstimate};
use crate::criteria::{
    check_hyp1, check_hyp2, check_hyp3, check_hyp5, check_thm_h, corollary_dbar, dn_upper_cor,
    thm_g_ratio, CriterionReport, VariationModel,
};
use crate::gmodel::{lex_decode, GModel, Word};
use crate::renewal::{
    build_alphabeta, limsup_limit, mean_limit, proposition_bound, renewal_limit, renewal_solve,
    RenewalSpec,
};
use crate::transfer::{uniqueness_diagnostic, CylinderFunction, TransferOperator};

fn words(base: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let count = base.pow(len as u32);
    (0..count).map(move |i| {
        let mut w = vec![0; len];
        lex_decode(i, base, len, &mut w);
        w
    })
}

pub(super) fn transfer(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), ExperimentError> {
    let p = &cfg.transfer;
    let model = cfg.require_model()?;
    let base = model.alphabet().size();
    let word = model
        .alphabet()
        .parse_word(0, &p.function)
        .map_err(|e| ExperimentError::field("transfer.function", e))?;
    let fun = CylinderFunction::indicator(base, &word);
    let rows = uniqueness_diagnostic(&model, &fun, p.n_max, p.truncation)?;
    out.csv(
        "oscillation.csv",
        &["n", "osc(L_g^n f) = sup - inf", "truncation_error"],
        rows.iter()
            .map(|r| vec![r.n.to_string(), f(r.oscillation), f(r.truncation_error)]),
    )?;

    let (fm, delta) = match &model {
        GModel::FiniteMemory(m) => (m.clone(), 0.0),
        GModel::LongRangeLinear(_) => model.truncated(p.truncation)?,
    };
    let op = TransferOperator::new(fm)?;
    let mu = op.stationary(p.tolerance)?;
    let alphabet = model.alphabet().clone();
    out.csv(
        "stationary.csv",
        &["word on [0 w-1]", "mu[word] (invariant measure of L_g)"],
        words(base, mu.window).map(|w| {
            vec![
                alphabet.format_word(&Word::new(0, w.clone())),
                f(mu.prob(&w)),
            ]
        }),
    )?;

    #[derive(Serialize)]
    struct Summary {
        window: usize,
        iterations: usize,
        residual: f64,
        unique_closed_class: bool,
        /// `sup_x Σ_s |g - g_t|` of the surrogate, zero for finite memory.
        surrogate_error: f64,
    }
    out.json(
        "stationary.json",
        &Summary {
            window: mu.window,
            iterations: mu.iterations,
            residual: mu.residual,
            unique_closed_class: mu.unique,
            surrogate_error: delta,
        },
    )
}

fn tails(cfg: &ExperimentConfig, model: &GModel) -> Result<(Word, Word), ExperimentError> {
    let c = &cfg.couple;
    let last = model.alphabet().size() - 1;
    let parse = |text: &str, fill: usize, field: &str| {
        if text.trim().is_empty() {
            Ok(Word::new(1, vec![fill; c.tail_len]))
        } else {
            model
                .alphabet()
                .parse_word(1, text)
                .map_err(|e| ExperimentError::field(field, e))
        }
    };
    Ok((
        parse(&c.tail_x, 0, "couple.tail_x")?,
        parse(&c.tail_y, last, "couple.tail_y")?,
    ))
}

fn monte_carlo(
    cfg: &ExperimentConfig,
    model: &GModel,
    schedule: &BlockSchedule,
) -> Result<DisagreementEstimate, ExperimentError> {
    let c = &cfg.couple;
    let (tx, ty) = tails(cfg, model)?;
    let seed = cfg.seed.expect("validated");
    Ok(estimate_disagreement(
        model,
        schedule,
        c.depth,
        &tx,
        &ty,
        c.trajectories,
        seed,
        &c.coupling_config(),
    )?)
}

const DISAGREEMENT: &str = "P[X_-n != Y_-n] (empirical)";
const RUN_FREQUENCY: &str = "P[block disagrees | agreement run k] (empirical)";

fn run_rows(est: &DisagreementEstimate) -> impl Iterator<Item = (usize, u64, f64, f64)> + '_ {
    (0..est.run_blocks.len()).filter_map(|k| {
        est.run_frequency(k)
            .map(|(p, se)| (k, est.run_blocks[k], p, se))
    })
}

pub(super) fn couple(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), ExperimentError> {
    let c = &cfg.couple;
    let model = cfg.require_model()?;
    let schedule = cfg.require_schedule()?;
    let est = monte_carlo(cfg, &model, &schedule)?;
    out.csv(
        "disagreement.csv",
        &["coordinate n", DISAGREEMENT, "stderr"],
        (0..=c.depth).map(|n| vec![n.to_string(), f(est.frequency(n)), f(est.stderr(n))]),
    )?;
    out.csv(
        "run_frequency.csv",
        &["agreement run k", "blocks", RUN_FREQUENCY, "stderr"],
        run_rows(&est).map(|(k, blocks, p, se)| vec![k.to_string(), blocks.to_string(), f(p), f(se)]),
    )?;
    if c.dn_blocks > 0 {
        let rows = (1..=c.dn_blocks)
            .map(|n| dn_bruteforce(&model, &schedule, n, c.tail_len, c.dn_budget))
            .collect::<Result<Vec<_>, _>>()?;
        out.csv(
            "dn.csv",
            &["block n", "d_n(g B) lower", "d_n(g B) upper", "configurations"],
            rows.iter().enumerate().map(|(i, d)| {
                vec![(i + 1).to_string(), f(d.lower), f(d.upper), d.configurations.to_string()]
            }),
        )?;
    }
    #[derive(Serialize)]
    struct Summary {
        trajectories: u64,
        depth: usize,
        schedule: String,
        max_truncation_error: f64,
    }
    out.json(
        "couple.json",
        &Summary {
            trajectories: est.trajectories,
            depth: c.depth,
            schedule: schedule.to_string(),
            max_truncation_error: est.max_truncation_error,
        },
    )
}

pub(super) fn renewal(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), ExperimentError> {
    let r = &cfg.renewal;
    let spec = RenewalSpec::new(r.d.clone(), r.b.clone(), r.k)?;
    let ab = build_alphabeta(&spec)?;
    let top = *spec.partial_sums().last().expect("K+1 partial sums");
    let n_max = if r.n_max == 0 { 50 * top } else { r.n_max };
    let u = renewal_solve(&ab, n_max);
    out.csv(
        "u.csv",
        &["n", "u_n = Ptilde[1 at -n]"],
        u.iter().enumerate().map(|(n, v)| vec![n.to_string(), f(*v)]),
    )?;
    out.csv(
        "alpha_beta.csv",
        &["i", "alpha_i", "beta_i"],
        (0..=top).map(|i| vec![i.to_string(), f(ab.alpha(i)), f(ab.beta(i))]),
    )?;
    let sweep = if r.k_sweep.is_empty() { vec![r.k] } else { r.k_sweep.clone() };
    let rows = sweep
        .iter()
        .map(|&k| {
            let ab = build_alphabeta(&RenewalSpec::new(r.d.clone(), r.b.clone(), k)?)?;
            Ok(vec![
                k.to_string(),
                f(mean_limit(&ab)?),
                f(renewal_limit(&ab)?),
                f(limsup_limit(&ab)?),
                ab.period.to_string(),
            ])
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    out.csv(
        "limits.csv",
        &[
            "K",
            "sum beta / sum i alpha",
            "lim u_mn (residue 0)",
            "limsup u_n",
            "period m",
        ],
        rows,
    )
}

fn variation(cfg: &ExperimentConfig, horizon: usize) -> Result<VariationModel, ExperimentError> {
    match &cfg.criteria.variation {
        Some(v) if cfg.experiment == super::ExperimentKind::Criteria => Ok(v.clone()),
        _ => Ok(VariationModel::from_model(&cfg.require_model()?, horizon)?),
    }
}

pub(super) fn criteria(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), ExperimentError> {
    let c = &cfg.criteria;
    let vm = variation(cfg, c.profile_horizon)?;
    let mut reports: Vec<CriterionReport> = Vec::new();
    for id in &c.checks {
        let report = match id.as_str() {
            "hyp1" => check_hyp1(&vm)?,
            "hyp2" => check_hyp2(&vm, c.epsilon)?,
            "hyp3" => check_hyp3(&vm)?,
            "hyp5" => check_hyp5(&vm, c.lambda)?,
            "thm_h" => {
                let d = c.d_sequence.as_ref().ok_or_else(|| {
                    ExperimentError::Config("criteria.d_sequence: required for thm_h".into())
                })?;
                check_thm_h(d)?
            }
            other => unreachable!("validated criterion id {other}"),
        };
        reports.push(report);
    }
    for r in &reports {
        if let Some(t) = &r.evidence.table {
            let header: Vec<&str> = t.columns.iter().map(String::as_str).collect();
            out.csv(
                &format!("evidence_{}.csv", r.id),
                &header,
                t.rows.iter().map(|row| row.iter().map(|v| f(*v)).collect()),
            )?;
        }
    }
    if c.corollary_blocks > 0 {
        let schedule = cfg.require_schedule()?;
        let rows = (1..=c.corollary_blocks)
            .map(|n| dn_upper_cor(&vm, &schedule, n, c.lambda))
            .collect::<Result<Vec<_>, _>>()?;
        let opt = |v: Option<f64>| v.map_or_else(String::new, f);
        out.csv(
            "corollary.csv",
            &["block n", "window start", "window end", "d_n rg2 bound", "d_n as bound", "best"],
            rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    r.window.0.to_string(),
                    r.window.1.to_string(),
                    opt(r.rg2),
                    opt(r.as_bound),
                    f(r.best()),
                ]
            }),
        )?;
    }
    #[derive(Serialize)]
    struct Report<'a> {
        variation: &'a VariationModel,
        epsilon: f64,
        lambda: f64,
        criteria: &'a [CriterionReport],
    }
    out.json(
        "criteria.json",
        &Report {
            variation: &vm,
            epsilon: c.epsilon,
            lambda: c.lambda,
            criteria: &reports,
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineSummary {
    pub best_k: usize,
    /// Smallest `Σβ/Σiα` over the sweep.
    pub best_bound: f64,
    /// `limsup u_n` at `best_k`.
    pub best_limsup: f64,
    pub dbar_tail: f64,
    pub compare_from: usize,
    /// Largest `freq_n - (bound + 3σ_n)` over `n ≥ compare_from`.
    pub max_excess: f64,
    pub consistent: bool,
    /// Largest `freq_k - (d̄_{k+1} + 3σ_k)` over observed agreement runs.
    pub run_max_excess: f64,
    pub run_consistent: bool,
}

pub(super) fn pipeline(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), ExperimentError> {
    let p = &cfg.pipeline;
    let c = &cfg.couple;
    let model = cfg.require_model()?;
    let schedule = cfg.require_schedule()?;
    let vm = VariationModel::from_model(&model, p.profile_horizon)?;

    let brute = (1..=p.brute_force_blocks)
        .map(|n| dn_bruteforce(&model, &schedule, n, c.tail_len, c.dn_budget).map(|d| d.upper))
        .collect::<Result<Vec<_>, _>>()?;
    let db = corollary_dbar(&vm, &schedule, p.horizon, p.lambda, Some(&brute))?;
    out.csv(
        "dbar.csv",
        &["block n", "d_n(g B) upper", "dbar_n = sup_{i>=n} d_i"],
        db.d.iter()
            .zip(&db.dbar)
            .enumerate()
            .map(|(i, (d, b))| vec![(i + 1).to_string(), f(*d), f(*b)]),
    )?;

    let k_max = *p.k_sweep.iter().max().expect("validated non-empty");
    let lengths = schedule.lengths(k_max + 1);
    let ratios = thm_g_ratio(&db.dbar, &lengths, &p.k_sweep)?;
    let prop = proposition_bound(&schedule, &db.dbar, &p.k_sweep)?;
    out.csv(
        "bound.csv",
        &["K", "R_K", "sum beta / sum i alpha", "limsup u_n", "lim u_mn (residue 0)", "period m"],
        ratios.iter().zip(&prop.rows).map(|(r, row)| {
            vec![
                r.k.to_string(),
                f(r.ratio),
                f(row.bound),
                f(row.limsup),
                f(row.renewal_limit),
                row.period.to_string(),
            ]
        }),
    )?;
    let best = prop.best.expect("non-empty sweep");

    let est = monte_carlo(cfg, &model, &schedule)?;
    let mut max_excess = f64::NEG_INFINITY;
    out.csv(
        "monte_carlo.csv",
        &["coordinate n", DISAGREEMENT, "stderr", "bound + 3 stderr"],
        (0..=c.depth)
            .map(|n| {
                let (p_n, se) = (est.frequency(n), est.stderr(n));
                if n >= p.compare_from {
                    max_excess = max_excess.max(p_n - (best.bound + 3.0 * se));
                }
                vec![n.to_string(), f(p_n), f(se), f(best.bound + 3.0 * se)]
            })
            .collect::<Vec<_>>(),
    )?;
    let dbar_at = |k: usize| db.dbar.get(k).copied().unwrap_or(db.tail);
    let mut run_max_excess = f64::NEG_INFINITY;
    out.csv(
        "run_frequency.csv",
        &["agreement run k", "blocks", RUN_FREQUENCY, "stderr", "dbar_{k+1}"],
        run_rows(&est)
            .map(|(k, blocks, pk, se)| {
                run_max_excess = run_max_excess.max(pk - (dbar_at(k) + 3.0 * se));
                vec![k.to_string(), blocks.to_string(), f(pk), f(se), f(dbar_at(k))]
            })
            .collect::<Vec<_>>(),
    )?;
    let summary = PipelineSummary {
        best_k: best.k,
        best_bound: best.bound,
        best_limsup: best.limsup,
        dbar_tail: db.tail,
        compare_from: p.compare_from,
        max_excess,
        consistent: max_excess <= 0.0,
        run_max_excess,
        run_consistent: run_max_excess <= 0.0,
    };
    if !summary.consistent || !summary.run_consistent {
        log::warn!("Monte Carlo frequencies exceed the bounds: {summary:?}");
    }
    out.json("pipeline.json", &summary)
}
