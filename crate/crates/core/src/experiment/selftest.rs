use std::path::Path;

use super::{run, ExperimentConfig, ExperimentError, ExperimentKind, LawSpec, ModelSpec};
use crate::criteria::VariationModel;

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Long-range `p = 2` model with `θ = 1/4` and coefficients summing to `1/2`.
pub fn long_range_p2() -> ModelSpec {
    ModelSpec::LongRangeLinear {
        alphabet: None,
        theta: 0.25,
        law: LawSpec::PowerP2 { total: 0.5 },
        signs: None,
    }
}

fn last_value(csv: &str) -> Option<f64> {
    csv.lines().last()?.split(',').nth(1)?.parse().ok()
}

/// Small end-to-end runs of every experiment under `dir`.
pub fn selftest(dir: &Path) -> Result<Vec<SelftestResult>, ExperimentError> {
    let mut results = Vec::new();
    let mut check = |name, passed, detail: String| {
        results.push(SelftestResult { name, passed, detail })
    };

    let mut cfg = ExperimentConfig::new(ExperimentKind::Renewal, dir.join("renewal"));
    cfg.renewal.d = vec![0.5];
    cfg.renewal.b = vec![2, 2];
    cfg.renewal.k = 1;
    run(&cfg)?;
    let u = std::fs::read_to_string(cfg.output.join("u.csv")).unwrap_or_default();
    let last = last_value(&u).unwrap_or(f64::NAN);
    check(
        "renewal: final u_n is 2/3",
        (last - 2.0 / 3.0).abs() < 1e-9,
        format!("u = {last}"),
    );

    let mut cfg = ExperimentConfig::new(ExperimentKind::Criteria, dir.join("criteria"));
    cfg.criteria.variation = Some(VariationModel::PowerLaw { c: 1.0, p: 2.0 });
    cfg.criteria.checks = ["hyp1", "hyp3", "hyp5"].map(String::from).to_vec();
    run(&cfg)?;
    let text = std::fs::read_to_string(cfg.output.join("criteria.json")).unwrap_or_default();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap_or_default();
    let verdicts: Vec<String> = json["criteria"]
        .as_array()
        .map(|a| a.iter().map(|r| r["verdict"].as_str().unwrap_or("").to_string()).collect())
        .unwrap_or_default();
    check(
        "criteria: power law p=2 satisfies hyp1 hyp3 hyp5",
        verdicts.len() == 3 && verdicts.iter().all(|v| v == "Satisfied"),
        format!("{verdicts:?}"),
    );

    let mut cfg = ExperimentConfig::new(ExperimentKind::Transfer, dir.join("transfer"));
    cfg.model = Some(ModelSpec::Iid {
        alphabet: None,
        probs: vec![0.3, 0.7],
    });
    cfg.transfer.n_max = 4;
    run(&cfg)?;
    let osc = std::fs::read_to_string(cfg.output.join("oscillation.csv")).unwrap_or_default();
    let last = last_value(&osc).unwrap_or(f64::NAN);
    check(
        "transfer: i.i.d. model mixes in one step",
        last.abs() < 1e-14,
        format!("oscillation = {last}"),
    );

    let couple = |name: &str| {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Couple, dir.join(name));
        cfg.seed = Some(7);
        cfg.model = Some(long_range_p2());
        cfg.schedule = Some("const:1".into());
        cfg.couple.depth = 16;
        cfg.couple.trajectories = 200;
        cfg
    };
    let a = run(&couple("couple_a"))?;
    let b = run(&couple("couple_b"))?;
    check(
        "couple: same seed gives identical checksums",
        a.outputs == b.outputs,
        format!("{} artifacts", a.outputs.len()),
    );
    Ok(results)
}
