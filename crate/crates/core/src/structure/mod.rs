//! Consistency, representativeness, timeliness and informativeness metrics.

pub mod consistency;
pub mod informativeness;
pub mod representativeness;
pub mod timeliness;

pub use consistency::*;
pub use informativeness::*;
pub use representativeness::*;
pub use timeliness::*;
