//! Uniqueness criteria and Hellinger-type bounds.
//!
//! Everything here works from the variation profile `n ↦ log ρ_[0,n](g)`,
//! given either in closed form ([`VariationModel`]) or tabulated from a
//! concrete model.

mod blocks;
mod hellinger;
mod hypotheses;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::coupling::CouplingError;
use crate::gmodel::{GModel, GModelError, TailModel, VariationProfile};
use crate::renewal::RenewalError;

pub use blocks::{
    corollary_dbar, dn_upper_cor, thm_g_ratio, thmc_blocks, CorollaryBounds, DbarBounds, RatioRow,
};
pub use hellinger::{
    as1_constant, as1_floor, d1_from_rho, hellinger_floor, tv_upper_rg2, AS1_K_LAMBDA_2,
    RG2_RHO_MAX,
};
pub use hypotheses::{check_hyp1, check_hyp2, check_hyp3, check_hyp5, check_thm_h, DSequence};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error("argument out of domain: {0}")]
    OutOfDomain(String),
    #[error("invalid variation model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error(transparent)]
    Renewal(#[from] RenewalError),
    #[error(transparent)]
    Model(#[from] GModelError),
}

/// Closed-form or tabulated `log ρ_[0,n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariationModel {
    /// `log ρ_n = c (n+1)^(-p)`.
    PowerLaw { c: f64, p: f64 },
    /// `log ρ_n = c rⁿ`, `0 ≤ r < 1`.
    Exponential { c: f64, r: f64 },
    /// `log ρ_n = level` for `n < memory`, zero afterwards.
    FiniteRange { memory: usize, level: f64 },
    /// Explicit values for `n = 0..values.len()`, then `tail`.
    Tabulated {
        values: Vec<f64>,
        tail: Box<VariationModel>,
    },
}

impl VariationModel {
    pub fn validate(&self) -> Result<(), CriteriaError> {
        let bad = |m: String| Err(CriteriaError::InvalidModel(m));
        match self {
            VariationModel::PowerLaw { c, p } => {
                if !(*c >= 0.0 && c.is_finite() && *p > 0.0 && p.is_finite()) {
                    return bad(format!("power law needs c ≥ 0, p > 0 (got c={c}, p={p})"));
                }
            }
            VariationModel::Exponential { c, r } => {
                if !(*c >= 0.0 && c.is_finite() && (0.0..1.0).contains(r)) {
                    return bad(format!("exponential needs c ≥ 0, 0 ≤ r < 1 (got c={c}, r={r})"));
                }
            }
            VariationModel::FiniteRange { level, .. } => {
                if !(*level >= 0.0 && level.is_finite()) {
                    return bad(format!("level {level} must be finite and ≥ 0"));
                }
            }
            VariationModel::Tabulated { values, tail } => {
                if values.iter().any(|v| !(*v >= 0.0)) {
                    return bad("tabulated values must be ≥ 0".into());
                }
                if values.windows(2).any(|w| w[1] > w[0]) {
                    return bad("tabulated values must be non-increasing".into());
                }
                tail.validate()?;
            }
        }
        Ok(())
    }

    /// `log ρ_[0,n]`.
    pub fn log_rho(&self, n: usize) -> f64 {
        match self {
            VariationModel::PowerLaw { c, p } => c * ((n + 1) as f64).powf(-p),
            VariationModel::Exponential { c, r } => c * r.powi(n as i32),
            VariationModel::FiniteRange { memory, level } => {
                if n < *memory {
                    *level
                } else {
                    0.0
                }
            }
            VariationModel::Tabulated { values, tail } => match values.get(n) {
                Some(&v) => v,
                None => tail.log_rho(n),
            },
        }
    }

    pub fn rho(&self, n: usize) -> f64 {
        self.log_rho(n).exp()
    }

    pub fn is_parametric(&self) -> bool {
        !matches!(self, VariationModel::Tabulated { .. })
    }

    /// Upper bound on `Σ_{j≥start} (log ρ_j)^power` for `power ≥ 1`, or
    /// `None` when the series diverges.
    pub fn power_sum_from(&self, start: usize, power: f64) -> Option<f64> {
        match self {
            VariationModel::PowerLaw { c, p } => {
                if *c == 0.0 {
                    return Some(0.0);
                }
                let t = p * power;
                if t <= 1.0 {
                    return None;
                }
                let x = (start + 1) as f64;
                Some(c.powf(power) * (x.powf(-t) + x.powf(1.0 - t) / (t - 1.0)))
            }
            VariationModel::Exponential { c, r } => {
                let q = r.powf(power);
                Some(c.powf(power) * q.powi(start as i32) / (1.0 - q))
            }
            VariationModel::FiniteRange { memory, level } => {
                Some(memory.saturating_sub(start) as f64 * level.powf(power))
            }
            VariationModel::Tabulated { values, tail } => {
                let head: f64 = values.iter().skip(start).map(|v| v.powf(power)).sum();
                Some(head + tail.power_sum_from(start.max(values.len()), power)?)
            }
        }
    }

    /// Tabulates `model`'s variation profile up to `horizon`, continued by
    /// the profile's closed-form tail.
    pub fn from_model(model: &GModel, horizon: usize) -> Result<Self, CriteriaError> {
        Self::from_profile(&model.variation_profile(horizon))
    }

    pub fn from_profile(profile: &VariationProfile) -> Result<Self, CriteriaError> {
        let last = profile.values.last().copied().unwrap_or(f64::INFINITY);
        let tail = match profile.tail {
            Some(TailModel::ZeroBeyond { memory }) => VariationModel::FiniteRange { memory, level: last },
            // scale·n^(-e) ≤ scale·2^e·(n+1)^(-e) for n ≥ 1
            Some(TailModel::PowerLaw { scale, exponent }) => VariationModel::PowerLaw {
                c: scale * 2f64.powf(exponent),
                p: exponent,
            },
            Some(TailModel::Exponential { scale, rate }) => {
                VariationModel::Exponential { c: scale, r: rate }
            }
            None => {
                return Err(CriteriaError::InvalidModel(
                    "profile has no tail model".into(),
                ))
            }
        };
        // Upper-bound profiles are made non-increasing by running minima
        // from the left, which keeps them upper bounds.
        let mut values = profile.values.clone();
        for i in 1..values.len() {
            values[i] = values[i].min(values[i - 1]);
        }
        let vm = VariationModel::Tabulated {
            values,
            tail: Box::new(tail),
        };
        vm.validate()?;
        Ok(vm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvidenceTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub reasoning: String,
    /// Limiting value of the tested quantity where known (`"inf"` in JSON
    /// when infinite).
    #[serde(serialize_with = "finite_or_text")]
    pub limit: Option<f64>,
    pub table: Option<EvidenceTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: String,
    pub verdict: Verdict,
    pub evidence: Evidence,
}

impl CriterionReport {
    pub(crate) fn closed_form(id: &str, verdict: Verdict, reasoning: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            verdict,
            evidence: Evidence {
                reasoning: reasoning.into(),
                limit: None,
                table: None,
            },
        }
    }
}

fn finite_or_text<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_none(),
        Some(x) if x.is_finite() => s.serialize_f64(*x),
        Some(x) if x.is_nan() => s.serialize_str("nan"),
        Some(x) if *x > 0.0 => s.serialize_str("inf"),
        Some(_) => s.serialize_str("-inf"),
    }
}
