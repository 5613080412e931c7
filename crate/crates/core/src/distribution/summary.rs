use serde::{Deserialize, Serialize};

use crate::data::{quantile_sorted, CategoricalCounts, Sample};
use crate::error::{Error, Result};
use crate::stats;

/// Single-distribution descriptors. Quartiles use linear interpolation
/// between closest ranks (type 7).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub range: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub iqr: f64,
    pub mean: f64,
    /// Sample standard deviation; `None` for a single value.
    pub std: Option<f64>,
}

pub fn summary_stats(s: &Sample) -> Result<SummaryStats> {
    if s.is_empty() {
        return Err(Error::Empty("summary statistics need at least one value".into()));
    }
    let v = s.sorted();
    let (min, max) = (v[0], v[v.len() - 1]);
    let q1 = quantile_sorted(&v, 0.25);
    let q3 = quantile_sorted(&v, 0.75);
    Ok(SummaryStats {
        n: v.len(),
        min,
        max,
        range: max - min,
        q1,
        median: quantile_sorted(&v, 0.5),
        q3,
        iqr: q3 - q1,
        mean: stats::mean(&v),
        std: (v.len() >= 2).then(|| stats::sd(&v)),
    })
}

/// Hill number of order `q`: the effective number of equally common
/// categories. Zero-count categories do not contribute.
pub fn hill_number(c: &CategoricalCounts, q: f64) -> Result<f64> {
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::param("q", "order must be a finite value >= 0"));
    }
    let p: Vec<f64> = c.proportions()?.into_iter().filter(|&p| p > 0.0).collect();
    if (q - 1.0).abs() < 1e-12 {
        let h: f64 = -p.iter().map(|&pi| pi * pi.ln()).sum::<f64>();
        return Ok(h.exp());
    }
    let s: f64 = p.iter().map(|&pi| pi.powf(q)).sum();
    Ok(s.powf(1.0 / (1.0 - q)))
}

/// Standardized mean difference with the pooled (n−1 weighted) standard deviation.
pub fn cohens_d(a: &Sample, b: &Sample) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidInput("cohen's d needs at least two values per sample".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = (((na - 1.0) * stats::variance(a.values()) + (nb - 1.0) * stats::variance(b.values()))
        / (na + nb - 2.0))
        .sqrt();
    if pooled == 0.0 {
        return Err(Error::Degenerate("pooled standard deviation is zero".into()));
    }
    Ok((stats::mean(a.values()) - stats::mean(b.values())) / pooled)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(v: &[(&str, u64)]) -> CategoricalCounts {
        v.iter().map(|&(k, c)| (k, c)).collect()
    }

    #[test]
    fn hill_examples() {
        let h = hill_number(&counts(&[("M", 4000), ("F", 1000)]), 2.0).unwrap();
        assert!((h - 1.0 / 0.68).abs() < 1e-12);
        assert!((hill_number(&counts(&[("M", 7), ("F", 7)]), 2.0).unwrap() - 2.0).abs() < 1e-12);
        for q in [0.0, 0.5, 1.0, 2.0, 3.0] {
            assert!((hill_number(&counts(&[("a", 9)]), q).unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(hill_number(&counts(&[("a", 3), ("b", 1), ("c", 0)]), 0.0).unwrap(), 2.0);
        assert!(hill_number(&counts(&[("a", 1)]), -1.0).is_err());
    }

    #[test]
    fn summary_degenerate() {
        let s = summary_stats(&Sample::new(vec![5.0])).unwrap();
        assert_eq!(s.range, 0.0);
        assert_eq!(s.std, None);
        assert!(summary_stats(&Sample::new(vec![])).is_err());
    }

    #[test]
    fn cohens_d_examples() {
        let a = Sample::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(cohens_d(&a, &a).unwrap(), 0.0);
        // pooled sd of [1,2,3] and [3,4,5] is 1
        assert_eq!(cohens_d(&a, &Sample::new(vec![3.0, 4.0, 5.0])).unwrap(), -2.0);
        assert!(cohens_d(&Sample::new(vec![1.0, 1.0]), &Sample::new(vec![1.0, 1.0])).is_err());
    }
}
