use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::data::{quantile_sorted, CategoricalCounts, Dataset, Role};
use crate::error::{Error, Result};
use crate::outcome::Flagged;

pub fn dataset_size(ds: &Dataset) -> usize {
    ds.n_records()
}

/// Number of columns with the feature role.
pub fn granularity(ds: &Dataset) -> Flagged<usize> {
    granularity_of(ds, &[Role::Feature])
}

/// Number of columns whose role is one of `roles`.
pub fn granularity_of(ds: &Dataset, roles: &[Role]) -> Flagged<usize> {
    let n = ds.columns().iter().filter(|c| roles.contains(&c.spec().role)).count();
    if n == 0 {
        Flagged::warn(0, "dataset has no columns with the counted roles")
    } else {
        Flagged::clean(n)
    }
}

/// Distinct declared sampling rates (Hz) across records with signals.
pub fn sampling_frequency(ds: &Dataset) -> Result<Flagged<Vec<f64>>> {
    let s = ds
        .signals()
        .ok_or_else(|| Error::InvalidInput("dataset has no signals".into()))?;
    let mut rates: Vec<f64> = s.declared_rates().into_iter().flatten().collect();
    if rates.is_empty() {
        return Err(Error::Empty("no record carries a signal".into()));
    }
    rates.sort_by(f64::total_cmp);
    rates.dedup();
    Ok(if rates.len() > 1 {
        Flagged::warn(rates, "heterogeneous sampling rates")
    } else {
        Flagged::clean(rates)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionSummary {
    pub min_width: f64,
    pub min_height: f64,
    pub median_width: f64,
    pub median_height: f64,
    pub n_images: usize,
}

/// Pixel dimensions of images (width, height) summarized by min and median.
pub fn resolution(sizes: &[(f64, f64)]) -> Result<ResolutionSummary> {
    if sizes.is_empty() {
        return Err(Error::Empty("no image metadata".into()));
    }
    let mut w: Vec<f64> = sizes.iter().map(|s| s.0).collect();
    let mut h: Vec<f64> = sizes.iter().map(|s| s.1).collect();
    w.sort_by(f64::total_cmp);
    h.sort_by(f64::total_cmp);
    Ok(ResolutionSummary {
        min_width: w[0],
        min_height: h[0],
        median_width: quantile_sorted(&w, 0.5),
        median_height: quantile_sorted(&h, 0.5),
        n_images: sizes.len(),
    })
}

/// Depth (number of levels) of a label hierarchy given as label → parent.
/// Labels without a parent are roots; parents not listed as labels are
/// roots as well.
pub fn label_granularity(parents: &IndexMap<String, Option<String>>) -> Result<usize> {
    if parents.is_empty() {
        return Err(Error::Empty("no labels".into()));
    }
    let mut depth = 0;
    for label in parents.keys() {
        let mut d = 1;
        let mut cur = label;
        while let Some(Some(p)) = parents.get(cur) {
            d += 1;
            if d > parents.len() + 1 {
                return Err(Error::InvalidInput(format!("label hierarchy has a cycle through `{label}`")));
            }
            cur = p;
        }
        depth = depth.max(d);
    }
    Ok(depth)
}

/// Majority class count over minority class count.
pub fn imbalance_ratio(c: &CategoricalCounts) -> Result<Flagged<f64>> {
    if c.is_empty() {
        return Err(Error::Empty("no classes".into()));
    }
    let counts = c.counts();
    let max = *counts.iter().max().unwrap() as f64;
    let min = *counts.iter().min().unwrap() as f64;
    if max == 0.0 {
        return Err(Error::Empty("all class counts are zero".into()));
    }
    if min == 0.0 {
        return Ok(Flagged::warn(f64::INFINITY, "a declared class has zero count"));
    }
    Ok(Flagged::clean(max / min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImbalanceDistance {
    #[default]
    TotalVariation,
    Hellinger,
    Euclidean,
}

impl ImbalanceDistance {
    fn eval(self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            ImbalanceDistance::TotalVariation => 0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>(),
            ImbalanceDistance::Hellinger => {
                (0.5 * p.iter().zip(q).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum::<f64>()).sqrt()
            }
            ImbalanceDistance::Euclidean => p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(),
        }
    }
}

/// The distribution with `m` minority classes farthest from uniform:
/// m zero classes, K − m − 1 classes at 1/K and one majority class.
pub fn extreme_distribution(k: usize, m: usize) -> Vec<f64> {
    let kf = k as f64;
    let mut v = vec![0.0; m];
    v.extend(std::iter::repeat_n(1.0 / kf, k - m - 1));
    v.push(1.0 - (k - m - 1) as f64 / kf);
    v
}

/// Imbalance degree: d(ζ, e)/d(ι_m, e) + (m − 1) with e uniform and m the
/// number of minority classes (ζ_i < 1/K); 0 when there is no minority class.
pub fn imbalance_degree(c: &CategoricalCounts, distance: ImbalanceDistance) -> Result<f64> {
    let k = c.len();
    if k < 2 {
        return Err(Error::InvalidInput("imbalance degree needs at least two classes".into()));
    }
    let p = c.proportions()?;
    let u = 1.0 / k as f64;
    let m = p.iter().filter(|&&x| x < u - 1e-15).count();
    if m == 0 {
        return Ok(0.0);
    }
    let e = vec![u; k];
    let iota = extreme_distribution(k, m);
    Ok(distance.eval(&p, &e) / distance.eval(&iota, &e) + (m as f64 - 1.0))
}

/// Likelihood-ratio imbalance degree 2 Σ n_i ln(n_i K / N).
pub fn lrid(c: &CategoricalCounts) -> Result<f64> {
    let k = c.len();
    if k < 2 {
        return Err(Error::InvalidInput("lrid needs at least two classes".into()));
    }
    let n = c.total() as f64;
    if n == 0.0 {
        return Err(Error::Empty("class counts sum to zero".into()));
    }
    let kf = k as f64;
    Ok(2.0
        * c.counts()
            .into_iter()
            .filter(|&x| x > 0)
            .map(|x| x as f64 * (x as f64 * kf / n).ln())
            .sum::<f64>())
}
