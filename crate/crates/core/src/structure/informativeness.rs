use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::distribution::TestOutcome;
use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Duplicates {
    pub count: usize,
    pub ratio: f64,
}

/// Records minus distinct key tuples. Missing cells compare equal to each other.
pub fn prevalence_of_duplicates(ds: &Dataset, keys: Option<&[String]>) -> Result<Duplicates> {
    let cols: Vec<&crate::data::Column> = match keys {
        Some(k) => k.iter().map(|c| ds.column(c)).collect::<Result<_>>()?,
        None => ds.columns().iter().collect(),
    };
    let n = ds.n_records();
    let mut seen: HashSet<Vec<Option<String>>> = HashSet::with_capacity(n);
    for i in 0..n {
        seen.insert(cols.iter().map(|c| c.cells()[i].as_ref().map(|v| v.key())).collect());
    }
    let count = n - seen.len();
    Ok(Duplicates {
        count,
        ratio: if n == 0 { 0.0 } else { count as f64 / n as f64 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EssInput {
    Weights { weights: Vec<f64> },
    Cluster { n: f64, cluster_size: f64, icc: f64 },
}

/// Kish's (Σw)²/Σw², or the design-effect form n / (1 + (m − 1)ρ).
pub fn effective_sample_size(input: &EssInput) -> Result<f64> {
    match input {
        EssInput::Weights { weights } => {
            if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
                return Err(Error::param("weights", "must be finite and nonnegative"));
            }
            let s: f64 = weights.iter().sum();
            if s == 0.0 {
                return Err(Error::param("weights", "all weights are zero"));
            }
            Ok(s * s / weights.iter().map(|w| w * w).sum::<f64>())
        }
        &EssInput::Cluster { n, cluster_size, icc } => {
            if !(0.0..=1.0).contains(&icc) {
                return Err(Error::param("icc", "must lie in [0, 1]"));
            }
            if !(n > 0.0) || !(cluster_size >= 1.0) {
                return Err(Error::param("cluster_size", "n must be positive and cluster size >= 1"));
            }
            Ok(n / (1.0 + (cluster_size - 1.0) * icc))
        }
    }
}

const EM_TOL: f64 = 1e-6;
const EM_MAX_ITER: usize = 200;
const RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EmFit {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn inverse_or_ridge(m: DMatrix<f64>, ridged: &mut bool) -> DMatrix<f64> {
    if let Some(inv) = m.clone().try_inverse() {
        if inv.iter().all(|v| v.is_finite()) {
            return inv;
        }
    }
    *ridged = true;
    let n = m.nrows();
    (m + DMatrix::identity(n, n) * RIDGE)
        .try_inverse()
        .unwrap_or_else(|| DMatrix::zeros(n, n))
}

/// Maximum-likelihood mean and covariance of a multivariate normal with
/// missing entries, by expectation-maximization.
pub fn em_normal(rows: &[Vec<Option<f64>>], p: usize) -> Result<(EmFit, bool)> {
    let n = rows.len() as f64;
    let mut mean = DVector::zeros(p);
    let mut var = DVector::zeros(p);
    for j in 0..p {
        let col: Vec<f64> = rows.iter().filter_map(|r| r[j]).collect();
        if col.len() < 2 {
            return Err(Error::InvalidInput(format!("variable {j} has fewer than two observed values")));
        }
        mean[j] = stats::mean(&col);
        var[j] = stats::pop_variance(&col).max(RIDGE);
    }
    let mut cov = DMatrix::from_diagonal(&var);
    let mut ridged = false;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=EM_MAX_ITER {
        iterations = it;
        let mut t1 = DVector::zeros(p);
        let mut t2 = DMatrix::zeros(p, p);
        for r in rows {
            let obs: Vec<usize> = (0..p).filter(|&j| r[j].is_some()).collect();
            let mis: Vec<usize> = (0..p).filter(|&j| r[j].is_none()).collect();
            let mut x = DVector::zeros(p);
            for &j in &obs {
                x[j] = r[j].unwrap();
            }
            let mut c = DMatrix::zeros(p, p);
            if !mis.is_empty() {
                let s_oo = cov.select_rows(obs.iter()).select_columns(obs.iter());
                let s_mo = cov.select_rows(mis.iter()).select_columns(obs.iter());
                let s_mm = cov.select_rows(mis.iter()).select_columns(mis.iter());
                let inv = inverse_or_ridge(s_oo, &mut ridged);
                let dev = DVector::from_iterator(obs.len(), obs.iter().map(|&j| x[j] - mean[j]));
                let b = &s_mo * &inv;
                let cond = DVector::from_iterator(mis.len(), mis.iter().map(|&j| mean[j])) + &b * dev;
                let cvar = s_mm - &b * s_mo.transpose();
                for (a, &ja) in mis.iter().enumerate() {
                    x[ja] = cond[a];
                    for (bb, &jb) in mis.iter().enumerate() {
                        c[(ja, jb)] = cvar[(a, bb)];
                    }
                }
            }
            t2 += &x * x.transpose() + c;
            t1 += x;
        }
        let new_mean = &t1 / n;
        let new_cov = &t2 / n - &new_mean * new_mean.transpose();
        let change = (&new_mean - &mean)
            .amax()
            .max((&new_cov - &cov).amax());
        mean = new_mean;
        cov = new_cov;
        if change < EM_TOL {
            converged = true;
            break;
        }
    }
    Ok((
        EmFit {
            mean,
            cov,
            iterations,
            converged,
        },
        ridged,
    ))
}

/// Little's test of the MCAR hypothesis for numerical variables.
/// `columns[j][i]` is variable j of record i; records missing every
/// variable are excluded.
pub fn littles_mcar_test(columns: &[Vec<Option<f64>>]) -> Result<TestOutcome> {
    let p = columns.len();
    if p < 2 {
        return Err(Error::InvalidInput("little's test needs at least two numerical columns".into()));
    }
    let n_all = columns[0].len();
    if columns.iter().any(|c| c.len() != n_all) {
        return Err(Error::LengthMismatch("columns differ in length".into()));
    }
    let rows: Vec<Vec<Option<f64>>> = (0..n_all)
        .map(|i| columns.iter().map(|c| c[i].filter(|v| v.is_finite())).collect::<Vec<_>>())
        .filter(|r: &Vec<Option<f64>>| r.iter().any(Option::is_some))
        .collect();
    let mut patterns: Vec<(Vec<bool>, Vec<usize>)> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let key: Vec<bool> = r.iter().map(Option::is_some).collect();
        match patterns.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(i),
            None => patterns.push((key, vec![i])),
        }
    }
    if patterns.iter().all(|(k, _)| k.iter().all(|&b| b)) {
        return Err(Error::InvalidInput("no missingness: little's test does not apply".into()));
    }
    if patterns.len() < 2 {
        return Err(Error::InvalidInput("little's test needs at least two missingness patterns".into()));
    }
    let (fit, mut ridged) = em_normal(&rows, p)?;
    let mut d2 = 0.0;
    let mut df = 0.0;
    for (key, members) in &patterns {
        let obs: Vec<usize> = (0..p).filter(|&j| key[j]).collect();
        let nj = members.len() as f64;
        let ybar = DVector::from_iterator(
            obs.len(),
            obs.iter().map(|&j| members.iter().map(|&i| rows[i][j].unwrap()).sum::<f64>() / nj),
        );
        let mu = DVector::from_iterator(obs.len(), obs.iter().map(|&j| fit.mean[j]));
        let s = fit.cov.select_rows(obs.iter()).select_columns(obs.iter());
        let inv = inverse_or_ridge(s, &mut ridged);
        let dev = ybar - mu;
        d2 += nj * (dev.transpose() * inv * &dev)[(0, 0)];
        df += obs.len() as f64;
    }
    df -= p as f64;
    let mut out = TestOutcome {
        statistic: d2,
        p_value: Some(stats::chi2_sf(d2, df)),
        method: "little_mcar_em".into(),
        sizes: vec![rows.len()],
        df: Some(df),
        warnings: Vec::new(),
    };
    if ridged {
        out.warnings.push(format!("singular pattern covariance: ridge {RIDGE:e} added"));
    }
    if !fit.converged {
        out.warnings.push(format!("EM did not converge within {EM_MAX_ITER} iterations"));
    }
    if n_all > rows.len() {
        out.warnings.push(format!("{} records with every variable missing excluded", n_all - rows.len()));
    }
    Ok(out)
}

/// The likelihood model for informative dropout has no implementation.
pub fn informative_dropout() -> Result<f64> {
    Err(Error::NotImplemented("no formula in source".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ColumnSpec, VarType};

    #[test]
    fn ess_examples() {
        let w = effective_sample_size(&EssInput::Weights { weights: vec![1.0, 1.0, 2.0] }).unwrap();
        assert!((w - 16.0 / 6.0).abs() < 1e-15);
        assert_eq!(effective_sample_size(&EssInput::Weights { weights: vec![2.0; 5] }).unwrap(), 5.0);
        let c = effective_sample_size(&EssInput::Cluster { n: 40.0, cluster_size: 40.0, icc: 1.0 }).unwrap();
        assert_eq!(c, 1.0);
        assert!(effective_sample_size(&EssInput::Weights { weights: vec![0.0, 0.0] }).is_err());
    }

    #[test]
    fn duplicate_examples() {
        let mut raw = vec![(0..9).map(|i| i.to_string()).collect::<Vec<_>>()];
        raw[0].push("3".into());
        let ds = Dataset::from_text_columns(vec![ColumnSpec::new("x", VarType::Categorical)], &raw).unwrap();
        let d = prevalence_of_duplicates(&ds, None).unwrap();
        assert_eq!((d.count, d.ratio), (1, 0.1));
    }

    #[test]
    fn little_requires_missingness() {
        let c = vec![vec![Some(1.0), Some(2.0), Some(3.0)], vec![Some(1.0), Some(0.0), Some(2.0)]];
        assert!(littles_mcar_test(&c).is_err());
        assert!(informative_dropout().is_err());
    }
}
