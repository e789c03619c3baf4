//! Configuration ingestion, experiment orchestration and CSV emission for
//! the secret-key-rate adaption library.

pub mod config;
pub mod csvout;
pub mod pipelines;
