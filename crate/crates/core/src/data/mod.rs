//! Typed in-memory datasets, samples, signals and ratings.

pub mod column;
pub mod dataset;
pub mod ratings;
pub mod sample;
pub mod signal;

pub use column::{ColumnSpec, Role, VarType};
pub use dataset::{parse_timestamp, Column, Dataset, Groups, Value};
pub use ratings::{RatingScale, RatingsMatrix};
pub use sample::{
    bin_index, histogram, histogram_with_edges, histograms_pooled, quantile_sorted, Binning,
    CategoricalCounts, Histogram, Sample,
};
pub use signal::{write_f32le, SignalBlock, SignalFile, SignalFormat, SignalHeader, SignalStore};
