//! Reproducible experiment runner.
//!
//! An [`ExperimentConfig`] names one experiment, its model and parameters,
//! a master seed and an output directory. [`run`] writes CSV tables and
//! JSON reports there, plus `manifest.json` with a SHA-256 checksum per
//! artifact.
//!
//! Seeds: Monte Carlo trajectory `i` draws from ChaCha8 keyed by the master
//! seed on stream `i` (see [`crate::rng::stream_rng`]), so results do not
//! depend on thread count or scheduling.

mod config;
mod output;
mod runs;
mod selftest;

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::coupling::CouplingError;
use crate::criteria::CriteriaError;
use crate::gmodel::GModelError;
use crate::renewal::RenewalError;
use crate::transfer::TransferError;

pub use config::{
    CoupleParams, CriteriaParams, ExperimentConfig, ExperimentKind, LawSpec, ModelSpec,
    PipelineParams, RenewalParams, TransferParams,
};
pub use output::fmt_f64;
pub use runs::PipelineSummary;
pub use selftest::{long_range_p2, selftest, SelftestResult};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl ExperimentError {
    pub(crate) fn field(name: &str, e: impl Display) -> Self {
        ExperimentError::Config(format!("{name}: {e}"))
    }

    /// `2` for config errors, `3` for budget errors, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            ExperimentError::Budget(_) => 3,
            _ => 1,
        }
    }
}

impl From<GModelError> for ExperimentError {
    fn from(e: GModelError) -> Self {
        match e {
            GModelError::Budget { .. } => ExperimentError::Budget(e.to_string()),
            _ => ExperimentError::Config(e.to_string()),
        }
    }
}

impl From<TransferError> for ExperimentError {
    fn from(e: TransferError) -> Self {
        match e {
            TransferError::Budget { .. } => ExperimentError::Budget(e.to_string()),
            TransferError::Model(m) => m.into(),
            TransferError::NotConverged { .. } => ExperimentError::Compute(e.to_string()),
            _ => ExperimentError::Config(e.to_string()),
        }
    }
}

impl From<CouplingError> for ExperimentError {
    fn from(e: CouplingError) -> Self {
        match e {
            CouplingError::Budget { .. } | CouplingError::BlockTooLong { .. } => {
                ExperimentError::Budget(e.to_string())
            }
            CouplingError::Model(m) => m.into(),
            CouplingError::Truncation { .. } => ExperimentError::Compute(e.to_string()),
            _ => ExperimentError::Config(e.to_string()),
        }
    }
}

impl From<RenewalError> for ExperimentError {
    fn from(e: RenewalError) -> Self {
        match e {
            RenewalError::InvalidSpec(_) => ExperimentError::Config(e.to_string()),
            RenewalError::Degenerate => ExperimentError::Compute(e.to_string()),
        }
    }
}

impl From<CriteriaError> for ExperimentError {
    fn from(e: CriteriaError) -> Self {
        match e {
            CriteriaError::Coupling(c) => c.into(),
            CriteriaError::Renewal(r) => r.into(),
            CriteriaError::Model(m) => m.into(),
            _ => ExperimentError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub experiment: ExperimentKind,
    /// SHA-256 of the config serialized as JSON.
    pub config_hash: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub wall_clock_seconds: f64,
    /// Artifact file name to SHA-256 of its bytes.
    pub outputs: BTreeMap<String, String>,
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// Validates `config`, runs the experiment and writes its artifacts and
/// `manifest.json` into `config.output`.
pub fn run(config: &ExperimentConfig) -> Result<RunManifest, ExperimentError> {
    config.validate()?;
    let start = Instant::now();
    let mut out = output::Outputs::create(&config.output)?;
    log::info!(
        "running {:?} into {}",
        config.experiment,
        config.output.display()
    );
    match config.experiment {
        ExperimentKind::Transfer => runs::transfer(config, &mut out)?,
        ExperimentKind::Couple => runs::couple(config, &mut out)?,
        ExperimentKind::Renewal => runs::renewal(config, &mut out)?,
        ExperimentKind::Criteria => runs::criteria(config, &mut out)?,
        ExperimentKind::Pipeline => runs::pipeline(config, &mut out)?,
    }
    let manifest = RunManifest {
        experiment: config.experiment,
        config_hash: config_hash(config),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        outputs: out.checksums().clone(),
    };
    out.write_manifest(&manifest)?;
    Ok(manifest)
}
