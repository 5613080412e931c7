use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite real values with the number of dropped (missing) entries recorded.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Sample {
    values: Vec<f64>,
    dropped: usize,
}

impl Sample {
    /// Non-finite inputs are dropped and counted.
    pub fn new(values: Vec<f64>) -> Self {
        Sample::with_dropped(values, 0)
    }

    pub fn with_dropped(values: Vec<f64>, dropped: usize) -> Self {
        let n = values.len();
        let values: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
        let dropped = dropped + (n - values.len());
        Sample { values, dropped }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

impl From<Vec<f64>> for Sample {
    fn from(v: Vec<f64>) -> Self {
        Sample::new(v)
    }
}

impl From<&[f64]> for Sample {
    fn from(v: &[f64]) -> Self {
        Sample::new(v.to_vec())
    }
}

/// Category → count, in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoricalCounts(IndexMap<String, u64>);

impl CategoricalCounts {
    pub fn new() -> Self {
        CategoricalCounts(IndexMap::new())
    }

    pub fn insert(&mut self, category: impl Into<String>, count: u64) {
        self.0.insert(category.into(), count);
    }

    pub fn add(&mut self, category: impl Into<String>, count: u64) {
        *self.0.entry(category.into()).or_insert(0) += count;
    }

    pub fn get(&self, category: &str) -> u64 {
        self.0.get(category).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn counts(&self) -> Vec<u64> {
        self.0.values().copied().collect()
    }

    /// Proportions in category order. Errors when the total is zero.
    pub fn proportions(&self) -> Result<Vec<f64>> {
        let total = self.total();
        if total == 0 {
            return Err(Error::Empty("categorical counts sum to zero".into()));
        }
        Ok(self.0.values().map(|&c| c as f64 / total as f64).collect())
    }

    /// Counts of both inputs aligned on the union of categories (order of
    /// first appearance, `self` first).
    pub fn align(&self, other: &CategoricalCounts) -> (Vec<String>, Vec<u64>, Vec<u64>) {
        let mut cats: Vec<String> = self.0.keys().cloned().collect();
        for k in other.0.keys() {
            if !self.0.contains_key(k) {
                cats.push(k.clone());
            }
        }
        let a = cats.iter().map(|c| self.get(c)).collect();
        let b = cats.iter().map(|c| other.get(c)).collect();
        (cats, a, b)
    }
}

impl<S: Into<String>> FromIterator<(S, u64)> for CategoricalCounts {
    fn from_iter<T: IntoIterator<Item = (S, u64)>>(iter: T) -> Self {
        let mut c = CategoricalCounts::new();
        for (k, v) in iter {
            c.add(k, v);
        }
        c
    }
}

/// Discretisation rule for continuous data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Binning {
    EqualWidth { bins: usize },
    ExplicitEdges { edges: Vec<f64> },
    Quantile { bins: usize },
}

impl Default for Binning {
    fn default() -> Self {
        Binning::EqualWidth { bins: 10 }
    }
}

impl Binning {
    /// Bin edges for the given values, plus warnings about degenerate cases.
    pub fn edges(&self, values: &[f64]) -> Result<(Vec<f64>, Vec<String>)> {
        let mut warnings = Vec::new();
        match self {
            Binning::EqualWidth { bins } | Binning::Quantile { bins } if *bins < 1 => {
                Err(Error::param("bins", "must be at least 1"))
            }
            Binning::EqualWidth { bins } => {
                let (lo, hi) = min_max(values)?;
                if lo == hi {
                    warnings.push(format!(
                        "all values equal ({lo}); equal_width binning collapsed to a single bin"
                    ));
                    return Ok((vec![lo, hi], warnings));
                }
                let w = (hi - lo) / *bins as f64;
                let mut e: Vec<f64> = (0..=*bins).map(|i| lo + w * i as f64).collect();
                e[*bins] = hi;
                Ok((e, warnings))
            }
            Binning::Quantile { bins } => {
                let mut sorted = values.to_vec();
                if sorted.is_empty() {
                    return Err(Error::Empty("cannot bin an empty sample".into()));
                }
                sorted.sort_by(f64::total_cmp);
                let mut e: Vec<f64> = (0..=*bins)
                    .map(|i| quantile_sorted(&sorted, i as f64 / *bins as f64))
                    .collect();
                let before = e.len();
                e.dedup();
                if e.len() < before {
                    warnings.push("tied quantiles merged into fewer bins".to_string());
                }
                if e.len() == 1 {
                    e.push(e[0]);
                }
                Ok((e, warnings))
            }
            Binning::ExplicitEdges { edges } => {
                if edges.len() < 2 {
                    return Err(Error::param("edges", "need at least two edges"));
                }
                if edges.windows(2).any(|w| !(w[0] < w[1])) || edges.iter().any(|x| !x.is_finite()) {
                    return Err(Error::param("edges", "must be finite and strictly increasing"));
                }
                Ok((edges.clone(), warnings))
            }
        }
    }
}

fn min_max(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Empty("cannot bin an empty sample".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Type-7 quantile (linear interpolation between closest ranks) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Index of the bin containing `x`. Bins are right-closed, `(e_i, e_{i+1}]`,
/// except the first which also includes its left edge.
pub fn bin_index(edges: &[f64], x: f64) -> Option<usize> {
    let n_bins = edges.len().checked_sub(1)?;
    if n_bins == 0 || x < edges[0] || x > edges[n_bins] {
        return None;
    }
    // first edge >= x
    let pos = edges.partition_point(|&e| e < x);
    Some(pos.saturating_sub(1).min(n_bins - 1))
}

/// Counts over bins together with the edges used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: CategoricalCounts,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Histogram {
    pub fn n_bins(&self) -> usize {
        self.edges.len() - 1
    }
}

/// Bin a sample; edges derived from the sample itself.
pub fn histogram(sample: &Sample, binning: &Binning) -> Result<Histogram> {
    if sample.is_empty() {
        return Err(Error::Empty("cannot bin an empty sample".into()));
    }
    let (edges, warnings) = binning.edges(sample.values())?;
    let mut h = histogram_with_edges(sample, &edges)?;
    h.warnings.extend(warnings);
    Ok(h)
}

/// Bin several samples on shared edges computed over their pooled values.
pub fn histograms_pooled(samples: &[&Sample], binning: &Binning) -> Result<Vec<Histogram>> {
    let pooled: Vec<f64> = samples.iter().flat_map(|s| s.values().iter().copied()).collect();
    let (edges, warnings) = binning.edges(&pooled)?;
    samples
        .iter()
        .map(|s| {
            let mut h = histogram_with_edges(s, &edges)?;
            h.warnings.extend(warnings.iter().cloned());
            Ok(h)
        })
        .collect()
}

pub fn histogram_with_edges(sample: &Sample, edges: &[f64]) -> Result<Histogram> {
    let n_bins = edges.len().saturating_sub(1);
    if n_bins == 0 {
        return Err(Error::param("edges", "need at least two edges"));
    }
    let mut counts = vec![0u64; n_bins];
    for &x in sample.values() {
        let b = bin_index(edges, x)
            .ok_or_else(|| Error::InvalidInput(format!("value {x} outside bin edges")))?;
        counts[b] += 1;
    }
    Ok(Histogram {
        edges: edges.to_vec(),
        counts: counts
            .into_iter()
            .enumerate()
            .map(|(i, c)| (format!("bin{i}"), c))
            .collect(),
        warnings: Vec::new(),
    })
}
