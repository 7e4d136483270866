pub mod coupling;
pub mod criteria;
pub mod experiment;
pub mod gmodel;
pub mod renewal;
pub mod rng;
pub mod transfer;
