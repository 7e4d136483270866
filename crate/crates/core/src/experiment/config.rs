use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::coupling::{BlockSchedule, CouplingConfig, DEFAULT_BLOCK_CAP};
use crate::criteria::{DSequence, VariationModel};
use crate::gmodel::{Alphabet, CoefficientLaw, FiniteMemory, GModel, LongRangeLinear};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Transfer,
    Couple,
    Renewal,
    Criteria,
    Pipeline,
}

impl ExperimentKind {
    pub fn is_stochastic(self) -> bool {
        matches!(self, ExperimentKind::Couple | ExperimentKind::Pipeline)
    }
}

/// Coefficient law of a long-range model file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LawSpec {
    Power { c: f64, p: f64 },
    Exponential { c: f64, r: f64 },
    /// `p = 2` with `c` chosen so the coefficients sum to `total`.
    PowerP2 { total: f64 },
}

impl From<LawSpec> for CoefficientLaw {
    fn from(l: LawSpec) -> Self {
        match l {
            LawSpec::Power { c, p } => CoefficientLaw::Power { c, p },
            LawSpec::Exponential { c, r } => CoefficientLaw::Exponential { c, r },
            LawSpec::PowerP2 { total } => CoefficientLaw::power_normalized_p2(total),
        }
    }
}

/// Model definition, written as a TOML table:
///
/// ```toml
/// variant = "finite_memory"      # or "iid", "long_range_linear"
/// alphabet = ["0", "1"]          # optional, binary by default
/// memory = 1
/// table = [0.8, 0.3, 0.2, 0.7]   # g(x_0 | x_1..x_M), lexicographic, x_0 first
/// ```
///
/// ```toml
/// variant = "long_range_linear"
/// theta = 0.25
/// law = "power_p2"               # or "power" (c, p), "exponential" (c, r)
/// total = 0.5
/// signs = [-1, 1]                # optional
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ModelSpec {
    FiniteMemory {
        #[serde(default)]
        alphabet: Option<Vec<String>>,
        memory: usize,
        table: Vec<f64>,
    },
    Iid {
        #[serde(default)]
        alphabet: Option<Vec<String>>,
        probs: Vec<f64>,
    },
    LongRangeLinear {
        #[serde(default)]
        alphabet: Option<Vec<String>>,
        theta: f64,
        #[serde(flatten)]
        law: LawSpec,
        #[serde(default)]
        signs: Option<[i8; 2]>,
    },
}

fn alphabet(symbols: &Option<Vec<String>>) -> Result<Alphabet, ExperimentError> {
    match symbols {
        None => Ok(Alphabet::binary()),
        Some(s) => Alphabet::new(s.iter().cloned()).map_err(|e| ExperimentError::field("model.alphabet", e)),
    }
}

impl ModelSpec {
    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("model file {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| ExperimentError::Config(format!("model file {}: {e}", path.display())))
    }

    pub fn build(&self) -> Result<GModel, ExperimentError> {
        let model: GModel = match self {
            ModelSpec::FiniteMemory { alphabet: a, memory, table } => {
                FiniteMemory::new(alphabet(a)?, *memory, table.clone())
                    .map_err(|e| ExperimentError::field("model", e))?
                    .into()
            }
            ModelSpec::Iid { alphabet: a, probs } => FiniteMemory::iid(alphabet(a)?, probs.clone())
                .map_err(|e| ExperimentError::field("model", e))?
                .into(),
            ModelSpec::LongRangeLinear { alphabet: a, theta, law, signs } => {
                LongRangeLinear::new(alphabet(a)?, *theta, (*law).into(), signs.unwrap_or([-1, 1]))
                    .map_err(|e| ExperimentError::field("model", e))?
                    .into()
            }
        };
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferParams {
    /// Iterates `ℒ_g^n f` for `n = 0..=n_max`.
    pub n_max: usize,
    /// Memory of the surrogate used for long-range models.
    pub truncation: usize,
    /// `f` is the indicator of this word at coordinates `0..`.
    pub function: String,
    pub tolerance: f64,
}

impl Default for TransferParams {
    fn default() -> Self {
        Self {
            n_max: 50,
            truncation: 8,
            function: "0".into(),
            tolerance: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoupleParams {
    pub depth: usize,
    pub trajectories: u64,
    /// Fixed tails on `[1, L]`. Empty means constant tails of `tail_len`
    /// copies of the first and last symbol.
    pub tail_x: String,
    pub tail_y: String,
    pub tail_len: usize,
    /// `d_n` is enumerated for `n = 1..=dn_blocks`.
    pub dn_blocks: usize,
    pub dn_budget: usize,
    pub block_cap: usize,
    pub truncation_tolerance: f64,
}

impl Default for CoupleParams {
    fn default() -> Self {
        Self {
            depth: 64,
            trajectories: 1000,
            tail_x: String::new(),
            tail_y: String::new(),
            tail_len: 4,
            dn_blocks: 0,
            dn_budget: crate::coupling::DN_BUDGET,
            block_cap: DEFAULT_BLOCK_CAP,
            truncation_tolerance: CouplingConfig::default().truncation_tolerance,
        }
    }
}

impl CoupleParams {
    pub fn coupling_config(&self) -> CouplingConfig {
        CouplingConfig {
            block_cap: self.block_cap,
            truncation_tolerance: self.truncation_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RenewalParams {
    pub d: Vec<f64>,
    pub b: Vec<usize>,
    pub k: usize,
    /// Last index of `u`; `0` means `50 B_{K+1}`.
    pub n_max: usize,
    /// Values of `K` for the limit table; empty means just `k`.
    pub k_sweep: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriteriaParams {
    /// Closed-form profile; if absent the profile is tabulated from the model.
    pub variation: Option<VariationModel>,
    pub profile_horizon: usize,
    pub checks: Vec<String>,
    pub epsilon: f64,
    pub lambda: f64,
    pub d_sequence: Option<DSequence>,
    /// Blocks for which the corollary bounds on `d_n` are tabulated
    /// (needs a schedule).
    pub corollary_blocks: usize,
}

impl Default for CriteriaParams {
    fn default() -> Self {
        Self {
            variation: None,
            profile_horizon: 32,
            checks: ["hyp1", "hyp2", "hyp3", "hyp5"].map(String::from).to_vec(),
            epsilon: 0.1,
            lambda: 2.0,
            d_sequence: None,
            corollary_blocks: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    /// Number of blocks with individual `d_n` bounds.
    pub horizon: usize,
    pub profile_horizon: usize,
    pub lambda: f64,
    pub k_sweep: Vec<usize>,
    /// Blocks also bounded by exhaustive enumeration.
    pub brute_force_blocks: usize,
    /// Coordinates `n ≥ compare_from` are checked against the bound.
    pub compare_from: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            horizon: 16,
            profile_horizon: 32,
            lambda: 2.0,
            k_sweep: vec![1, 2, 4, 8],
            brute_force_blocks: 0,
            compare_from: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: Option<u64>,
    pub output: PathBuf,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub model_file: Option<PathBuf>,
    /// `const:b`, `explicit:b1,b2,...` or `geometric:l`.
    #[serde(default)]
    pub schedule: Option<String>,
    #[serde(default)]
    pub transfer: TransferParams,
    #[serde(default)]
    pub couple: CoupleParams,
    #[serde(default)]
    pub renewal: RenewalParams,
    #[serde(default)]
    pub criteria: CriteriaParams,
    #[serde(default)]
    pub pipeline: PipelineParams,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, output: impl Into<PathBuf>) -> Self {
        Self {
            experiment,
            seed: None,
            output: output.into(),
            model: None,
            model_file: None,
            schedule: None,
            transfer: TransferParams::default(),
            couple: CoupleParams::default(),
            renewal: RenewalParams::default(),
            criteria: CriteriaParams::default(),
            pipeline: PipelineParams::default(),
        }
    }

    /// Reads a TOML config; relative `output` and `model_file` paths are
    /// taken relative to the config file.
    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("config {}: {e}", path.display())))?;
        let mut cfg: Self = toml::from_str(&text)
            .map_err(|e| ExperimentError::Config(format!("config {}: {e}", path.display())))?;
        if let Some(dir) = path.parent() {
            if cfg.output.is_relative() {
                cfg.output = dir.join(&cfg.output);
            }
            if let Some(m) = cfg.model_file.as_mut() {
                if m.is_relative() {
                    *m = dir.join(&*m);
                }
            }
        }
        Ok(cfg)
    }

    pub fn model_spec(&self) -> Result<Option<ModelSpec>, ExperimentError> {
        match (&self.model, &self.model_file) {
            (Some(_), Some(_)) => Err(ExperimentError::Config(
                "give either model or model_file, not both".into(),
            )),
            (Some(m), None) => Ok(Some(m.clone())),
            (None, Some(path)) => ModelSpec::from_file(path).map(Some),
            (None, None) => Ok(None),
        }
    }

    pub fn require_model(&self) -> Result<GModel, ExperimentError> {
        self.model_spec()?
            .ok_or_else(|| ExperimentError::Config("model: required for this experiment".into()))?
            .build()
    }

    pub fn require_schedule(&self) -> Result<BlockSchedule, ExperimentError> {
        let s = self
            .schedule
            .as_deref()
            .ok_or_else(|| ExperimentError::Config("schedule: required for this experiment".into()))?;
        s.parse().map_err(|e| ExperimentError::field("schedule", e))
    }

    /// Field-level checks that need no model construction.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let need = |ok: bool, field: &str, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(ExperimentError::Config(format!("{field}: {what}")))
            }
        };
        if self.experiment.is_stochastic() {
            need(self.seed.is_some(), "seed", "required for stochastic experiments")?;
        }
        if let Some(s) = &self.schedule {
            s.parse::<BlockSchedule>()
                .map_err(|e| ExperimentError::field("schedule", e))?;
        }
        match self.experiment {
            ExperimentKind::Transfer => {
                let t = &self.transfer;
                need(t.n_max > 0, "transfer.n_max", "must be positive")?;
                need(t.truncation > 0, "transfer.truncation", "must be positive")?;
                need(!t.function.trim().is_empty(), "transfer.function", "must be a non-empty word")?;
                need(t.tolerance > 0.0, "transfer.tolerance", "must be positive")?;
            }
            ExperimentKind::Couple => self.validate_couple()?,
            ExperimentKind::Renewal => {
                let r = &self.renewal;
                need(r.b.len() > r.k, "renewal.b", "must list K+1 block lengths")?;
                need(r.d.len() >= r.k, "renewal.d", "must list K values")?;
                need(r.b.iter().all(|&b| b > 0), "renewal.b", "block lengths must be positive")?;
                need(
                    r.d.iter().all(|d| (0.0..=1.0).contains(d)),
                    "renewal.d",
                    "values must lie in [0, 1]",
                )?;
            }
            ExperimentKind::Criteria => {
                let c = &self.criteria;
                need(c.epsilon > 0.0, "criteria.epsilon", "must be positive")?;
                need(c.lambda > 1.0, "criteria.lambda", "must exceed 1")?;
                need(c.profile_horizon > 0, "criteria.profile_horizon", "must be positive")?;
                for id in &c.checks {
                    need(
                        matches!(id.as_str(), "hyp1" | "hyp2" | "hyp3" | "hyp5" | "thm_h"),
                        "criteria.checks",
                        &format!("unknown criterion {id:?}"),
                    )?;
                }
                if let Some(v) = &c.variation {
                    v.validate().map_err(|e| ExperimentError::field("criteria.variation", e))?;
                }
            }
            ExperimentKind::Pipeline => {
                self.validate_couple()?;
                let p = &self.pipeline;
                need(p.horizon > 0, "pipeline.horizon", "must be positive")?;
                need(p.profile_horizon > 0, "pipeline.profile_horizon", "must be positive")?;
                need(p.lambda > 1.0, "pipeline.lambda", "must exceed 1")?;
                need(!p.k_sweep.is_empty(), "pipeline.k_sweep", "must not be empty")?;
                need(
                    p.k_sweep.iter().all(|&k| k >= 1 && k <= p.horizon),
                    "pipeline.k_sweep",
                    "values must lie in 1..=horizon",
                )?;
                need(
                    p.compare_from <= self.couple.depth,
                    "pipeline.compare_from",
                    "must not exceed couple.depth",
                )?;
            }
        }
        Ok(())
    }

    fn validate_couple(&self) -> Result<(), ExperimentError> {
        let c = &self.couple;
        let need = |ok: bool, field: &str, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(ExperimentError::Config(format!("couple.{field}: {what}")))
            }
        };
        need(c.depth > 0, "depth", "must be positive")?;
        need(c.trajectories > 0, "trajectories", "must be positive")?;
        need(c.block_cap > 0, "block_cap", "must be positive")?;
        need(c.dn_budget > 0, "dn_budget", "must be positive")?;
        need(c.truncation_tolerance > 0.0, "truncation_tolerance", "must be positive")
    }
}
