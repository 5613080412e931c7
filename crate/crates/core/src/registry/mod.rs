//! Metric cards and metric evaluation.

pub mod card;
pub mod evaluate;
pub mod result;

pub use card::{
    all_cards, card, filter, render_card, render_markdown, CardFilter, CardFormat, CardVarType, Cluster,
    Dimension, Group, MetricCard, Modality, PitfallTag,
};
pub use evaluate::{evaluate, params, ParamMap};
pub use result::{fmt2, round2, MetricResult, MetricValue, Real, Scope, ScopeTarget};
