//! Couplings of conditional block laws.
//!
//! Two sequences `x`, `y` with prescribed pasts are grown leftward from
//! coordinate 0 one block at a time. After `k` consecutive agreeing blocks
//! the next block has length `b_{k+1}`, and the two conditional laws of that
//! block are coupled maximally.

mod block;
mod dn;
mod maximal;
pub(crate) mod schedule;

use thiserror::Error;

use crate::gmodel::GModelError;

pub use block::{
    estimate_disagreement, sample_block_coupling, sample_block_coupling_with, BlockRecord,
    CoupledSample, CouplingConfig, DisagreementEstimate, DEFAULT_BLOCK_CAP,
};
pub use dn::{dbar, dn_bruteforce, DnBounds, DN_BUDGET};
pub use maximal::{
    maximal_coupling, total_variation, CouplingTable, FiniteDist, MaximalCoupling, Support,
};
pub use schedule::{next_block, BlockSchedule, CouplingState, TailRule};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CouplingError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("marginals live on different supports")]
    SupportMismatch,
    #[error("block of length {len} exceeds the enumeration cap {cap}")]
    BlockTooLong { len: usize, cap: usize },
    #[error("truncation error {error} exceeds tolerance {tolerance}")]
    Truncation { error: f64, tolerance: f64 },
    #[error("{states} joint states exceed the enumeration budget {budget}")]
    Budget { states: usize, budget: usize },
    #[error("invalid block schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid tail context: {0}")]
    InvalidTail(String),
    #[error(transparent)]
    Model(#[from] GModelError),
}
