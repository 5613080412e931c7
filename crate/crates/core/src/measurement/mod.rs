//! Measurement-process metrics: accuracy, label agreement and completeness.

pub mod accuracy;
pub mod agreement;
pub mod completeness;

pub use accuracy::*;
pub use agreement::*;
pub use completeness::*;
