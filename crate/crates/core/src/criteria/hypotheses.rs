use serde::{Deserialize, Serialize};

use super::{CriteriaError, CriterionReport, EvidenceTable, VariationModel, Verdict};

/// Rows of partial-sum diagnostics for tabulated inputs.
const DIAGNOSTIC_ROWS: usize = 64;

fn tabulated(
    id: &str,
    vm: &VariationModel,
    reasoning: String,
    columns: &[&str],
    rows: Vec<Vec<f64>>,
) -> CriterionReport {
    let mut r = CriterionReport::closed_form(id, Verdict::Inconclusive, reasoning);
    r.evidence.table = Some(EvidenceTable {
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
    });
    if let VariationModel::Tabulated { values, .. } = vm {
        if let Some(p) = fitted_exponent(values) {
            r.evidence.reasoning += &format!("; fitted decay exponent {p:.4}");
        }
    }
    r
}

/// Least-squares slope of `-log v_n` against `log(n+1)` over the second half
/// of the positive tabulated values.
pub(crate) fn fitted_exponent(values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .skip(values.len() / 2)
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(n, v)| (((n + 1) as f64).ln(), -v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn table_len(vm: &VariationModel) -> usize {
    match vm {
        VariationModel::Tabulated { values, .. } => values.len().max(1),
        _ => DIAGNOSTIC_ROWS,
    }
}

fn partial_sums(vm: &VariationModel, f: impl Fn(f64) -> f64) -> Vec<Vec<f64>> {
    let mut acc = 0.0;
    (0..table_len(vm))
        .map(|n| {
            acc += f(vm.log_rho(n));
            vec![n as f64, vm.log_rho(n), acc]
        })
        .collect()
}

/// `Σ_n (log ρ_[0,n])² < ∞`.
pub fn check_hyp1(vm: &VariationModel) -> Result<CriterionReport, CriteriaError> {
    vm.validate()?;
    let id = "hyp1";
    Ok(match vm {
        VariationModel::PowerLaw { c, p } => {
            if *c == 0.0 || 2.0 * p > 1.0 {
                CriterionReport::closed_form(id, Verdict::Satisfied, format!("p-series with exponent 2p = {} > 1 converges", 2.0 * p))
            } else {
                CriterionReport::closed_form(id, Verdict::Violated, format!("p-series with exponent 2p = {} ≤ 1 diverges", 2.0 * p))
            }
        }
        VariationModel::Exponential { .. } => {
            CriterionReport::closed_form(id, Verdict::Satisfied, "geometric series converges")
        }
        VariationModel::FiniteRange { .. } => {
            CriterionReport::closed_form(id, Verdict::Satisfied, "finitely many non-zero terms")
        }
        VariationModel::Tabulated { tail, .. } => tabulated(
            id,
            vm,
            format!(
                "tabulated profile; tail model gives {:?}",
                check_hyp1(tail)?.verdict
            ),
            &["n", "log rho_[0,n]", "sum_{i<=n} (log rho_[0,i])^2"],
            partial_sums(vm, |l| l * l),
        ),
    })
}

/// `Σ_n Π_{i≤n} ρ_[0,i]^{-(1/2+ε)} = ∞`.
///
/// The terms are `exp(-(1/2+ε) S_n)` with `S_n = Σ_{i≤n} log ρ_i`. If `S_n`
/// stays bounded the terms do not vanish and the series diverges. For a
/// power law with `p = 1`, `S_n = c H_{n+1} ~ c log n`, so the terms behave
/// like `n^{-(1/2+ε)c}` and the series diverges iff `(1/2+ε)c ≤ 1`. For
/// `p < 1`, `S_n` grows like `n^{1-p}` and the terms are summable.
pub fn check_hyp2(vm: &VariationModel, epsilon: f64) -> Result<CriterionReport, CriteriaError> {
    if !(epsilon > 0.0) {
        return Err(CriteriaError::OutOfDomain(format!("ε = {epsilon} must be positive")));
    }
    vm.validate()?;
    let id = "hyp2";
    let bounded = "Σ log ρ_i converges, so the terms stay bounded below";
    Ok(match vm {
        VariationModel::PowerLaw { c, p } => {
            if *c == 0.0 || *p > 1.0 {
                CriterionReport::closed_form(id, Verdict::Satisfied, bounded)
            } else if *p == 1.0 {
                let e = (0.5 + epsilon) * c;
                let v = if e <= 1.0 { Verdict::Satisfied } else { Verdict::Violated };
                let mut r = CriterionReport::closed_form(id, v, format!("terms decay like n^(-{e})"));
                r.evidence.limit = Some(e);
                r
            } else {
                CriterionReport::closed_form(id, Verdict::Violated, format!("terms decay like exp(-C n^{})", 1.0 - p))
            }
        }
        VariationModel::Exponential { .. } | VariationModel::FiniteRange { .. } => {
            CriterionReport::closed_form(id, Verdict::Satisfied, bounded)
        }
        VariationModel::Tabulated { tail, .. } => {
            let s = 0.5 + epsilon;
            let mut log_prod = 0.0;
            let mut total = 0.0;
            let rows = (0..table_len(vm))
                .map(|n| {
                    log_prod += vm.log_rho(n);
                    total += (-s * log_prod).exp();
                    vec![n as f64, (-s * log_prod).exp(), total]
                })
                .collect();
            tabulated(
                id,
                vm,
                format!(
                    "tabulated profile; tail model gives {:?}",
                    check_hyp2(tail, epsilon)?.verdict
                ),
                &["n", "prod_{i<=n} rho_[0,i]^-(1/2+eps)", "partial sum"],
                rows,
            )
        }
    })
}

/// `log ρ_[0,n] = o(n^{-1/2})`.
pub fn check_hyp3(vm: &VariationModel) -> Result<CriterionReport, CriteriaError> {
    vm.validate()?;
    let id = "hyp3";
    Ok(match vm {
        VariationModel::PowerLaw { c, p } => {
            if *c == 0.0 || *p > 0.5 {
                CriterionReport::closed_form(id, Verdict::Satisfied, format!("n^(-{p}) = o(n^(-1/2))"))
            } else {
                CriterionReport::closed_form(id, Verdict::Violated, format!("n^(-{p}) is not o(n^(-1/2))"))
            }
        }
        VariationModel::Exponential { .. } | VariationModel::FiniteRange { .. } => {
            CriterionReport::closed_form(id, Verdict::Satisfied, "decays faster than any power")
        }
        VariationModel::Tabulated { tail, .. } => tabulated(
            id,
            vm,
            format!("tabulated profile; tail model gives {:?}", check_hyp3(tail)?.verdict),
            &["n", "log rho_[0,n]", "sqrt(n) log rho_[0,n]"],
            (0..table_len(vm))
                .map(|n| {
                    let l = vm.log_rho(n);
                    vec![n as f64, l, (n as f64).sqrt() * l]
                })
                .collect(),
        ),
    })
}

fn ceil_pow(lambda: f64, n: i32) -> usize {
    let x = lambda.powi(n);
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Largest window upper end tabulated in the evidence for [`check_hyp5`].
const WINDOW_LIMIT: usize = 1 << 20;

/// `lim_n Σ_{i=⌈λ^{n-1}⌉}^{⌈λⁿ⌉} (log ρ_[0,i])² = 0`.
///
/// For a power law `(log ρ_i)² = c²(i+1)^{-2p}`: the window sums vanish when
/// `2p > 1`, tend to `c² log λ` when `2p = 1`, and diverge when `2p < 1`.
pub fn check_hyp5(vm: &VariationModel, lambda: f64) -> Result<CriterionReport, CriteriaError> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(CriteriaError::OutOfDomain(format!("λ = {lambda} must exceed 1")));
    }
    vm.validate()?;
    let id = "hyp5";
    let mut rows = Vec::new();
    let mut n = 1;
    loop {
        let lo = ceil_pow(lambda, n - 1);
        let hi = ceil_pow(lambda, n);
        if hi > WINDOW_LIMIT {
            break;
        }
        let s: f64 = (lo..=hi).map(|i| vm.log_rho(i).powi(2)).sum();
        rows.push(vec![n as f64, lo as f64, hi as f64, s]);
        n += 1;
    }
    let columns = ["n", "window start", "window end", "sum (log rho_[0,i])^2"];
    let (verdict, limit, reasoning) = match vm {
        VariationModel::PowerLaw { c, p } => {
            if *c == 0.0 || 2.0 * p > 1.0 {
                (Verdict::Satisfied, 0.0, format!("2p = {} > 1: window sums vanish", 2.0 * p))
            } else if 2.0 * p == 1.0 {
                (Verdict::Violated, c * c * lambda.ln(), "2p = 1: window sums tend to c² log λ".to_string())
            } else {
                (Verdict::Violated, f64::INFINITY, format!("2p = {} < 1: window sums diverge", 2.0 * p))
            }
        }
        VariationModel::Exponential { .. } | VariationModel::FiniteRange { .. } => {
            (Verdict::Satisfied, 0.0, "window sums vanish".to_string())
        }
        VariationModel::Tabulated { tail, .. } => {
            let tail_verdict = check_hyp5(tail, lambda)?.verdict;
            return Ok(tabulated(
                id,
                vm,
                format!("tabulated profile; tail model gives {tail_verdict:?}"),
                &columns,
                rows,
            ));
        }
    };
    let mut r = CriterionReport::closed_form(id, verdict, reasoning);
    r.evidence.limit = Some(limit);
    r.evidence.table = Some(EvidenceTable {
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
    });
    Ok(r)
}

/// Single-site disagreement sequences `d_n`, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DSequence {
    Constant { value: f64 },
    /// `d_n = min(1, a n^{-q})`.
    Power { a: f64, q: f64 },
    /// `d_n = 1 - 1/n`.
    OneMinusReciprocal,
    Tabulated { values: Vec<f64> },
}

impl DSequence {
    pub fn value(&self, n: usize) -> f64 {
        match self {
            DSequence::Constant { value } => *value,
            DSequence::Power { a, q } => (a * (n as f64).powf(-q)).min(1.0),
            DSequence::OneMinusReciprocal => 1.0 - 1.0 / n as f64,
            DSequence::Tabulated { values } => values.get(n - 1).copied().unwrap_or(f64::NAN),
        }
    }
}

/// `Σ_n Π_{i≤n} (1 - d_i) = ∞`.
pub fn check_thm_h(d: &DSequence) -> Result<CriterionReport, CriteriaError> {
    let id = "thm_h";
    let r = |v, s: &str| Ok(CriterionReport::closed_form(id, v, s));
    match d {
        DSequence::Constant { value } => {
            if !(0.0..=1.0).contains(value) {
                return Err(CriteriaError::OutOfDomain(format!("d = {value}")));
            }
            if *value == 0.0 {
                r(Verdict::Satisfied, "all products equal 1")
            } else {
                r(Verdict::Violated, "geometric products are summable")
            }
        }
        DSequence::Power { a, q } => {
            if !(*a >= 0.0 && *q > 0.0) {
                return Err(CriteriaError::OutOfDomain(format!("a = {a}, q = {q}")));
            }
            if *a >= 1.0 {
                r(Verdict::Violated, "d_1 = 1, so every product vanishes")
            } else if *a == 0.0 || *q > 1.0 {
                r(Verdict::Satisfied, "Σ d_n < ∞, so the products stay bounded below")
            } else if *q == 1.0 {
                r(Verdict::Satisfied, "products decay like n^(-a) with a < 1")
            } else {
                r(Verdict::Violated, "products decay like exp(-C n^(1-q))")
            }
        }
        DSequence::OneMinusReciprocal => r(Verdict::Violated, "products equal 1/n!"),
        DSequence::Tabulated { values } => {
            if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(CriteriaError::OutOfDomain("d values outside [0, 1]".into()));
            }
            let mut prod = 1.0;
            let mut total = 0.0;
            let rows = values
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    prod *= 1.0 - d;
                    total += prod;
                    vec![(i + 1) as f64, *d, prod, total]
                })
                .collect();
            let mut rep = CriterionReport::closed_form(
                id,
                Verdict::Inconclusive,
                "tabulated sequence; partial sums only",
            );
            rep.evidence.table = Some(EvidenceTable {
                columns: ["n", "d_n", "prod_{i<=n} (1-d_i)", "partial sum"]
                    .iter()
                    .map(|c| c.to_string())
                    .collect(),
                rows,
            });
            Ok(rep)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pl(c: f64, p: f64) -> VariationModel {
        VariationModel::PowerLaw { c, p }
    }

    #[test]
    fn hyp1_examples() {
        assert_eq!(check_hyp1(&pl(1.0, 2.0)).unwrap().verdict, Verdict::Satisfied);
        assert_eq!(check_hyp1(&pl(1.0, 0.5)).unwrap().verdict, Verdict::Violated);
        let fr = VariationModel::FiniteRange { memory: 3, level: 0.4 };
        assert_eq!(check_hyp1(&fr).unwrap().verdict, Verdict::Satisfied);
    }

    #[test]
    fn hyp2_examples() {
        let fr = VariationModel::FiniteRange { memory: 3, level: 0.4 };
        assert_eq!(check_hyp2(&fr, 0.1).unwrap().verdict, Verdict::Satisfied);
        assert_eq!(check_hyp2(&pl(1.0, 2.0), 0.1).unwrap().verdict, Verdict::Satisfied);
        // (1/2 + ε) c ≤ 1
        assert_eq!(check_hyp2(&pl(1.5, 1.0), 0.1).unwrap().verdict, Verdict::Satisfied);
        assert_eq!(check_hyp2(&pl(2.0, 1.0), 0.1).unwrap().verdict, Verdict::Violated);
        assert_eq!(check_hyp2(&pl(0.1, 0.5), 0.1).unwrap().verdict, Verdict::Violated);
        assert!(check_hyp2(&fr, 0.0).is_err());
    }

    #[test]
    fn hyp2_power_one_matches_partial_sums() {
        // terms ~ n^{-e}: the partial sums grow without bound iff e ≤ 1
        for (c, growing) in [(1.0, true), (3.0, false)] {
            let vm = pl(c, 1.0);
            let eps = 0.1;
            let mut log_prod = 0.0;
            let terms: Vec<f64> = (0..100_000)
                .map(|i| {
                    log_prod += vm.log_rho(i);
                    (-(0.5 + eps) * log_prod).exp()
                })
                .collect();
            let s1: f64 = terms[..1000].iter().sum();
            let s2: f64 = terms.iter().sum();
            let verdict = check_hyp2(&vm, eps).unwrap().verdict;
            assert_eq!(verdict == Verdict::Satisfied, growing, "c={c}");
            assert_eq!(s2 > 2.0 * s1, growing, "c={c}");
        }
    }

    #[test]
    fn hyp3_examples() {
        assert_eq!(check_hyp3(&pl(1.0, 1.0)).unwrap().verdict, Verdict::Satisfied);
        assert_eq!(check_hyp3(&pl(1.0, 0.5)).unwrap().verdict, Verdict::Violated);
        let ex = VariationModel::Exponential { c: 1.0, r: 0.9 };
        assert_eq!(check_hyp3(&ex).unwrap().verdict, Verdict::Satisfied);
    }

    #[test]
    fn hyp5_limits() {
        let r = check_hyp5(&pl(1.0, 1.0), 2.0).unwrap();
        assert_eq!(r.verdict, Verdict::Satisfied);
        let last = r.evidence.table.as_ref().unwrap().rows.last().unwrap()[3];
        assert!(last < 1e-5);

        for lambda in [1.5, 2.0, 4.0] {
            let c: f64 = 1.3;
            let r = check_hyp5(&pl(c, 0.5), lambda).unwrap();
            assert_eq!(r.verdict, Verdict::Violated);
            let expected = c * c * lambda.ln();
            assert!((r.evidence.limit.unwrap() - expected).abs() < 1e-12);
            // numeric windows approach c² log λ (the window includes both ends)
            let last = r.evidence.table.as_ref().unwrap().rows.last().unwrap()[3];
            assert!((last - expected).abs() < 1e-2 * expected, "λ={lambda}: {last}");
        }
        assert_eq!(check_hyp5(&pl(1.0, 0.3), 2.0).unwrap().evidence.limit, Some(f64::INFINITY));
        assert!(check_hyp5(&pl(1.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn hyp5_is_lambda_invariant_and_implied() {
        for c in [0.2, 1.0, 3.0] {
            for p in [0.3, 0.5, 0.6, 1.0, 2.0] {
                let vm = pl(c, p);
                let verdicts: Vec<Verdict> = [1.5, 2.0, 4.0]
                    .iter()
                    .map(|&l| check_hyp5(&vm, l).unwrap().verdict)
                    .collect();
                assert!(verdicts.windows(2).all(|w| w[0] == w[1]));
                if check_hyp1(&vm).unwrap().verdict == Verdict::Satisfied
                    || check_hyp3(&vm).unwrap().verdict == Verdict::Satisfied
                {
                    assert_eq!(verdicts[0], Verdict::Satisfied);
                }
            }
        }
    }

    #[test]
    fn tabulated_is_inconclusive() {
        let vm = VariationModel::Tabulated {
            values: (0..40).map(|n| 0.5 / (n as f64 + 1.0).powi(2)).collect(),
            tail: Box::new(pl(0.5, 2.0)),
        };
        for r in [
            check_hyp1(&vm).unwrap(),
            check_hyp2(&vm, 0.1).unwrap(),
            check_hyp3(&vm).unwrap(),
            check_hyp5(&vm, 2.0).unwrap(),
        ] {
            assert_eq!(r.verdict, Verdict::Inconclusive);
            assert!(r.evidence.table.is_some());
            assert!(r.evidence.reasoning.contains("Satisfied"));
            assert!(r.evidence.reasoning.contains("fitted decay exponent 2.0000"));
        }
    }

    #[test]
    fn thm_h_examples() {
        let v = |d: DSequence| check_thm_h(&d).unwrap().verdict;
        assert_eq!(v(DSequence::Constant { value: 0.0 }), Verdict::Satisfied);
        assert_eq!(v(DSequence::OneMinusReciprocal), Verdict::Violated);
        assert_eq!(v(DSequence::Power { a: 0.7, q: 1.0 }), Verdict::Satisfied);
        assert_eq!(v(DSequence::Power { a: 0.5, q: 0.5 }), Verdict::Violated);
        assert_eq!(v(DSequence::Constant { value: 0.1 }), Verdict::Violated);
        let tab = check_thm_h(&DSequence::Tabulated { values: vec![0.5, 0.25] }).unwrap();
        assert_eq!(tab.verdict, Verdict::Inconclusive);
        assert_eq!(tab.evidence.table.unwrap().rows[1][3], 0.5 + 0.375);
    }

    #[test]
    fn one_minus_reciprocal_products() {
        let d = DSequence::OneMinusReciprocal;
        let mut prod = 1.0;
        for n in 1..10 {
            prod *= 1.0 - d.value(n);
        }
        assert!((prod - 1.0 / 362_880.0).abs() < 1e-15);
    }
}
