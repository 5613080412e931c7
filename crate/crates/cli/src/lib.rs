//! Dataset descriptors, reports, subsets and the PTB-XL harness behind `dq`.

pub mod descriptor;
pub mod harness;
pub mod interactive;
pub mod report;
pub mod subset;
