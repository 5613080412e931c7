use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::CategoricalCounts;
use crate::error::{Error, Result};
use crate::outcome::Flagged;
use crate::stats;

/// Shannon entropy of a categorical distribution in units of `base`
/// (natural log when `base` is e).
pub fn shannon_entropy(c: &CategoricalCounts, base: f64) -> Result<f64> {
    if !(base > 1.0) {
        return Err(Error::param("base", "must be > 1"));
    }
    let p = c.proportions()?;
    let h: f64 = -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>();
    Ok((h / base.ln()).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleEntropyParams {
    /// Embedding length.
    pub m: usize,
    /// Tolerance as a fraction of the series standard deviation.
    pub r: f64,
}

impl Default for SampleEntropyParams {
    fn default() -> Self {
        SampleEntropyParams { m: 2, r: 0.2 }
    }
}

/// Sample entropy −ln(A/B) with Chebyshev distance, tolerance r·sd and
/// self-matches excluded. Both template lengths use the first N − m
/// starting points. `None` when no template pairs of length m + 1 match.
pub fn sample_entropy(series: &[f64], p: SampleEntropyParams) -> Result<Flagged<Option<f64>>> {
    if p.m < 1 {
        return Err(Error::param("m", "must be >= 1"));
    }
    if !(p.r > 0.0) {
        return Err(Error::param("r", "must be positive"));
    }
    let n = series.len();
    if n < p.m + 2 {
        return Err(Error::InvalidInput(format!(
            "series of length {n} is shorter than m + 2 = {}",
            p.m + 2
        )));
    }
    let sd = stats::sd(series);
    if sd == 0.0 {
        return Ok(Flagged::warn(Some(0.0), "constant series: sample entropy set to 0"));
    }
    let tol = p.r * sd;
    let m = p.m;
    let templates = n - m;
    let (b, a) = (0..templates)
        .into_par_iter()
        .map(|i| {
            let (mut b, mut a) = (0u64, 0u64);
            for j in i + 1..templates {
                if (0..m).all(|k| (series[i + k] - series[j + k]).abs() <= tol) {
                    b += 1;
                    if (series[i + m] - series[j + m]).abs() <= tol {
                        a += 1;
                    }
                }
            }
            (b, a)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    if b == 0 || a == 0 {
        return Ok(Flagged::warn(None, "undefined, insufficient matches"));
    }
    Ok(Flagged::clean(Some(-(a as f64 / b as f64).ln())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionLimits {
    pub lod: f64,
    pub loq: f64,
    pub blank_mean: f64,
    pub blank_sd: f64,
}

/// Limit of detection and quantification from blank-sample measurements:
/// mean + k·sd with k = `k_lod`, `k_loq` (3.3 and 10 by convention).
pub fn lod_loq(blanks: &[f64], k_lod: f64, k_loq: f64) -> Result<Flagged<DetectionLimits>> {
    if blanks.len() < 3 {
        return Err(Error::InvalidInput("lod/loq need at least three blank measurements".into()));
    }
    if !(k_lod > 0.0) || !(k_loq >= k_lod) {
        return Err(Error::param("k_loq", "multipliers must satisfy 0 < k_lod <= k_loq"));
    }
    let mean = stats::mean(blanks);
    let sd = stats::sd(blanks);
    let out = DetectionLimits {
        lod: mean + k_lod * sd,
        loq: mean + k_loq * sd,
        blank_mean: mean,
        blank_sd: sd,
    };
    Ok(if sd == 0.0 {
        Flagged::warn(out, "blank measurements have zero spread: lod = loq = mean")
    } else {
        Flagged::clean(out)
    })
}

/// Bland-Altman coefficient of repeatability: 1.96 × sd of within-pair differences.
pub fn bland_altman_cr(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::InvalidInput("bland-altman needs at least two pairs".into()));
    }
    let d: Vec<f64> = pairs.iter().map(|(a, b)| a - b).collect();
    Ok(1.96 * stats::sd(&d))
}

/// Repeated measurements grouped by subject (or by condition).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RepeatedMeasures(pub IndexMap<String, Vec<f64>>);

impl RepeatedMeasures {
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut m: IndexMap<String, Vec<f64>> = IndexMap::new();
        for (k, v) in pairs {
            m.entry(k.into()).or_default().push(v);
        }
        RepeatedMeasures(m)
    }

    pub fn groups(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

/// Within-subject sd (root mean of per-subject variances) over the grand mean.
pub fn repeatability_cv(rm: &RepeatedMeasures) -> Result<Flagged<f64>> {
    let usable: Vec<&[f64]> = rm.groups().map(|(_, v)| v).filter(|v| v.len() >= 2).collect();
    if usable.is_empty() {
        return Err(Error::InvalidInput("no subject has at least two repeated measurements".into()));
    }
    let skipped = rm.0.len() - usable.len();
    let within_var = usable.iter().map(|v| stats::variance(v)).sum::<f64>() / usable.len() as f64;
    let all: Vec<f64> = usable.iter().flat_map(|v| v.iter().copied()).collect();
    let grand = stats::mean(&all);
    if !(grand > 0.0) {
        return Err(Error::Degenerate("grand mean must be positive".into()));
    }
    let mut out = Flagged::clean(within_var.sqrt() / grand);
    if skipped > 0 {
        out.warnings.push(format!("{skipped} subjects with a single measurement ignored"));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproducibilityComponents {
    /// Repeatability variance s_r².
    pub repeatability: f64,
    /// Between-condition variance s_L², clipped at 0.
    pub between: f64,
    /// Reproducibility variance s_R² = s_r² + s_L².
    pub reproducibility: f64,
}

/// One-way ANOVA variance components across conditions.
pub fn reproducibility_variance(rm: &RepeatedMeasures) -> Result<Flagged<ReproducibilityComponents>> {
    let groups: Vec<&[f64]> = rm.groups().map(|(_, v)| v).collect();
    if groups.len() < 2 {
        return Err(Error::InvalidInput("reproducibility needs at least two conditions".into()));
    }
    if groups.iter().any(|g| g.len() < 2) {
        return Err(Error::InvalidInput("each condition needs at least two repeats".into()));
    }
    let p = groups.len() as f64;
    let sizes: Vec<f64> = groups.iter().map(|g| g.len() as f64).collect();
    let n: f64 = sizes.iter().sum();
    let all: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let grand = stats::mean(&all);
    let means: Vec<f64> = groups.iter().map(|g| stats::mean(g)).collect();
    let ssw: f64 = groups
        .iter()
        .zip(&means)
        .map(|(g, m)| g.iter().map(|x| (x - m).powi(2)).sum::<f64>())
        .sum();
    let ssb: f64 = sizes.iter().zip(&means).map(|(ni, m)| ni * (m - grand).powi(2)).sum();
    let msw = ssw / (n - p);
    let msb = ssb / (p - 1.0);
    let n_bar = (n - sizes.iter().map(|x| x * x).sum::<f64>() / n) / (p - 1.0);
    let between = ((msb - msw) / n_bar).max(0.0);
    let mut out = Flagged::clean(ReproducibilityComponents {
        repeatability: msw,
        between,
        reproducibility: msw + between,
    });
    if sizes.iter().any(|&s| s != sizes[0]) {
        out.warnings
            .push("unbalanced design: effective group size used for the between-condition component".into());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentError {
    /// Mean of measured − reference.
    pub systematic: f64,
    /// Standard deviation of measured − reference.
    pub random: f64,
}

pub fn instrument_error(measured: &[f64], reference: &[f64]) -> Result<InstrumentError> {
    if measured.len() != reference.len() {
        return Err(Error::LengthMismatch(format!(
            "{} measurements vs {} reference values",
            measured.len(),
            reference.len()
        )));
    }
    if measured.len() < 2 {
        return Err(Error::InvalidInput("instrument error needs at least two pairs".into()));
    }
    let d: Vec<f64> = measured.iter().zip(reference).map(|(m, r)| m - r).collect();
    Ok(InstrumentError {
        systematic: stats::mean(&d),
        random: stats::sd(&d),
    })
}
