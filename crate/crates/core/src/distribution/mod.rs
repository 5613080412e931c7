//! Single-distribution descriptors and two-distribution distances,
//! divergences and hypothesis tests.

pub mod divergence;
pub mod embedding;
pub mod hypothesis;
pub mod kernel;
pub mod summary;
pub mod transport;

pub use divergence::{divergence, divergence_counts, divergence_samples, DivergenceKind, DivergenceOutcome, Smoothing};
pub use embedding::EmbeddingSet;
pub use hypothesis::{anderson_darling_k, chi_squared, epps_singleton, ks_2samp, mann_whitney_u, TestOutcome};
pub use kernel::{energy_distance, kid, median_heuristic, mmd, Kernel, KernelOutcome};
pub use summary::{cohens_d, hill_number, summary_stats, SummaryStats};
pub use transport::{frechet_gaussian, wasserstein_1d, FrechetOutcome};
