//! High-utility sequential pattern mining over quantitative sequence
//! databases, with seq-array projections and TRSU-based pruning.

pub mod bounds;
pub mod cli;
pub mod datagen;
pub mod miner;
pub mod oracle;
pub mod pattern;
pub mod qsdb;
pub mod seqstore;

pub use bounds::BoundKind;
pub use miner::{mine, HuspResult, MineStats, MinerConfig, Threshold};
pub use pattern::Pattern;
pub use qsdb::{ItemId, Qsdb};
