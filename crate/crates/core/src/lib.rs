//! Data-quality metrics, metric cards and decision-tree metric selection.

pub mod correlation;
pub mod data;
pub mod distribution;
pub mod error;
pub mod measurement;
pub mod outcome;
pub mod registry;
pub mod selection;
pub mod stats;
pub mod structure;

pub use error::{Error, Result};
pub use outcome::Flagged;
