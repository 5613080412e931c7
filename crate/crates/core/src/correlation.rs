//! Correlation coefficients: Pearson, Spearman, Kendall tau-b,
//! Goodman-Kruskal gamma, concordance, intraclass and Cramér's V.

use serde::{Deserialize, Serialize};

use crate::data::RatingsMatrix;
use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    Pearson,
    Spearman,
    KendallTau,
    GoodmanKruskalGamma,
}

/// Drops pairs where either side is missing or non-finite.
pub fn pairwise_complete(x: &[Option<f64>], y: &[Option<f64>]) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!("{} vs {} values", x.len(), y.len())));
    }
    let mut a = Vec::with_capacity(x.len());
    let mut b = Vec::with_capacity(y.len());
    for (u, v) in x.iter().zip(y) {
        if let (Some(u), Some(v)) = (u, v) {
            if u.is_finite() && v.is_finite() {
                a.push(*u);
                b.push(*v);
            }
        }
    }
    let dropped = x.len() - a.len();
    Ok((a, b, dropped))
}

fn check_pairs(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!("{} vs {} values", x.len(), y.len())));
    }
    if x.len() < min {
        return Err(Error::InvalidInput(format!("need at least {min} complete pairs, got {}", x.len())));
    }
    Ok(())
}

pub fn correlation(kind: CorrelationKind, x: &[f64], y: &[f64]) -> Result<f64> {
    check_pairs(x, y, 3)?;
    match kind {
        CorrelationKind::Pearson => pearson(x, y),
        CorrelationKind::Spearman => pearson(&stats::midranks(x), &stats::midranks(y)),
        CorrelationKind::KendallTau => {
            let c = pair_counts(x, y);
            let denom = ((c.n0 - c.ties_x) * (c.n0 - c.ties_y)).sqrt();
            if denom == 0.0 {
                return Err(Error::Degenerate("one variable is constant".into()));
            }
            Ok(((c.concordant - c.discordant) / denom).clamp(-1.0, 1.0))
        }
        CorrelationKind::GoodmanKruskalGamma => {
            let c = pair_counts(x, y);
            if c.concordant + c.discordant == 0.0 {
                return Err(Error::Degenerate("all pairs are tied".into()));
            }
            Ok((c.concordant - c.discordant) / (c.concordant + c.discordant))
        }
    }
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let (mx, my) = (stats::mean(x), stats::mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pair classification counts (as f64 to avoid overflow in products).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCounts {
    pub n0: f64,
    pub ties_x: f64,
    pub ties_y: f64,
    pub ties_xy: f64,
    pub concordant: f64,
    pub discordant: f64,
}

fn tied_pairs(sorted_keys: impl Iterator<Item = bool>) -> f64 {
    // `true` marks an element equal to its predecessor
    let (mut total, mut run) = (0.0, 1.0);
    for same in sorted_keys {
        if same {
            run += 1.0;
        } else {
            total += run * (run - 1.0) / 2.0;
            run = 1.0;
        }
    }
    total + run * (run - 1.0) / 2.0
}

fn merge_count(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], buf) + merge_count(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf.push(v[i]);
            i += 1;
        } else {
            buf.push(v[j]);
            swaps += (mid - i) as u64;
            j += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Concordant/discordant/tied pair counts by Knight's O(n log n) method.
pub fn pair_counts(x: &[f64], y: &[f64]) -> PairCounts {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]).then(y[i].total_cmp(&y[j])));
    let ties_x = tied_pairs((1..n).map(|k| x[idx[k]] == x[idx[k - 1]]));
    let ties_xy = tied_pairs((1..n).map(|k| x[idx[k]] == x[idx[k - 1]] && y[idx[k]] == y[idx[k - 1]]));
    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = Vec::with_capacity(n);
    let discordant = merge_count(&mut ys, &mut buf) as f64;
    let ties_y = tied_pairs((1..n).map(|k| ys[k] == ys[k - 1]));
    let n0 = (n * n.saturating_sub(1)) as f64 / 2.0;
    let concordant = n0 - ties_x - ties_y + ties_xy - discordant;
    PairCounts {
        n0,
        ties_x,
        ties_y,
        ties_xy,
        concordant,
        discordant,
    }
}

/// Lin's concordance correlation coefficient with population (1/n) moments.
pub fn concordance_cc(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pairs(x, y, 2)?;
    let (mx, my) = (stats::mean(x), stats::mean(y));
    let cov = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / x.len() as f64;
    let denom = stats::pop_variance(x) + stats::pop_variance(y) + (mx - my).powi(2);
    if denom == 0.0 {
        return Err(Error::Degenerate("both variables constant and equal".into()));
    }
    Ok(2.0 * cov / denom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccOutcome {
    pub value: f64,
    pub ms_rows: f64,
    pub ms_cols: f64,
    pub ms_error: f64,
    pub items_used: usize,
    pub items_dropped: usize,
}

/// ICC(2,1): two-way random effects, single measure, absolute agreement.
/// Items with any missing rating are removed listwise.
pub fn icc(m: &RatingsMatrix) -> Result<IccOutcome> {
    let k = m.n_raters();
    if k < 2 {
        return Err(Error::InvalidInput("icc needs at least two raters".into()));
    }
    let rows = m.complete_rows();
    let n = rows.len();
    if n < 2 {
        return Err(Error::InvalidInput("icc needs at least two fully rated items".into()));
    }
    let (nf, kf) = (n as f64, k as f64);
    let grand = rows.iter().flatten().sum::<f64>() / (nf * kf);
    let row_means: Vec<f64> = rows.iter().map(|r| stats::mean(r)).collect();
    let col_means: Vec<f64> = (0..k).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / nf).collect();
    let ss_total: f64 = rows.iter().flatten().map(|v| (v - grand).powi(2)).sum();
    let ss_rows = kf * row_means.iter().map(|v| (v - grand).powi(2)).sum::<f64>();
    let ss_cols = nf * col_means.iter().map(|v| (v - grand).powi(2)).sum::<f64>();
    let ss_err = (ss_total - ss_rows - ss_cols).max(0.0);
    let msr = ss_rows / (nf - 1.0);
    let msc = ss_cols / (kf - 1.0);
    let mse = ss_err / ((nf - 1.0) * (kf - 1.0));
    let denom = msr + (kf - 1.0) * mse + kf * (msc - mse) / nf;
    if denom <= 0.0 || msr == 0.0 {
        return Err(Error::Degenerate("zero between-item variance".into()));
    }
    Ok(IccOutcome {
        value: (msr - mse) / denom,
        ms_rows: msr,
        ms_cols: msc,
        ms_error: mse,
        items_used: n,
        items_dropped: m.n_items() - n,
    })
}

/// Contingency table of two label vectors over pairwise-complete records.
/// Row and column categories are in order of first appearance.
pub fn contingency(a: &[Option<String>], b: &[Option<String>]) -> Result<(Vec<String>, Vec<String>, Vec<Vec<u64>>)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(format!("{} vs {} values", a.len(), b.len())));
    }
    let mut rows: Vec<String> = Vec::new();
    let mut cols: Vec<String> = Vec::new();
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for (x, y) in a.iter().zip(b) {
        if let (Some(x), Some(y)) = (x, y) {
            let i = rows.iter().position(|r| r == x).unwrap_or_else(|| {
                rows.push(x.clone());
                rows.len() - 1
            });
            let j = cols.iter().position(|c| c == y).unwrap_or_else(|| {
                cols.push(y.clone());
                cols.len() - 1
            });
            cells.push((i, j));
        }
    }
    let mut table = vec![vec![0u64; cols.len()]; rows.len()];
    for (i, j) in cells {
        table[i][j] += 1;
    }
    Ok((rows, cols, table))
}

/// Cramér's V = √(χ² / (n (min(r, c) − 1))), without bias correction.
pub fn cramers_v(table: &[Vec<u64>]) -> Result<f64> {
    let r = table.len();
    let c = table.first().map_or(0, Vec::len);
    if table.iter().any(|row| row.len() != c) {
        return Err(Error::InvalidInput("ragged contingency table".into()));
    }
    if r < 2 || c < 2 {
        return Err(Error::Degenerate("cramér's v needs at least two categories per variable".into()));
    }
    let row_tot: Vec<f64> = table.iter().map(|row| row.iter().sum::<u64>() as f64).collect();
    let col_tot: Vec<f64> = (0..c).map(|j| table.iter().map(|row| row[j]).sum::<u64>() as f64).collect();
    if row_tot.iter().chain(&col_tot).any(|&t| t == 0.0) {
        return Err(Error::Degenerate("a contingency marginal is zero".into()));
    }
    let n: f64 = row_tot.iter().sum();
    let mut chi2 = 0.0;
    for i in 0..r {
        for j in 0..c {
            let e = row_tot[i] * col_tot[j] / n;
            chi2 += (table[i][j] as f64 - e).powi(2) / e;
        }
    }
    Ok((chi2 / (n * (r.min(c) - 1) as f64)).sqrt().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_reference() {
        let v = correlation(CorrelationKind::Pearson, &[1., 2., 3.], &[1., 2., 4.]).unwrap();
        // cov 1.5, sd 1 and √(7/3)
        assert!((v - 1.5 / (7.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((v - 0.9820).abs() < 1e-4);
    }

    #[test]
    fn kendall_reversal_and_gamma() {
        assert_eq!(correlation(CorrelationKind::KendallTau, &[1., 2., 3.], &[3., 2., 1.]).unwrap(), -1.0);
        let g = correlation(CorrelationKind::GoodmanKruskalGamma, &[1., 1., 2., 3.], &[1., 2., 2., 3.]).unwrap();
        assert_eq!(g, 1.0);
    }

    #[test]
    fn ccc_reference() {
        assert!((concordance_cc(&[1., 2., 3.], &[2., 3., 4.]).unwrap() - 4.0 / 7.0).abs() < 1e-15);
        assert_eq!(concordance_cc(&[1., 2., 3.], &[1., 2., 3.]).unwrap(), 1.0);
    }

    #[test]
    fn cramers_v_reference() {
        assert!((cramers_v(&[vec![10, 20], vec![20, 10]]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(cramers_v(&[vec![5, 0], vec![0, 5]]).unwrap(), 1.0);
        assert_eq!(cramers_v(&[vec![5, 5], vec![5, 5]]).unwrap(), 0.0);
        assert!(cramers_v(&[vec![5, 0], vec![5, 0]]).is_err());
    }

    #[test]
    fn icc_identical_raters() {
        let m = RatingsMatrix::from_numeric(vec![
            vec![Some(1.0), Some(1.0)],
            vec![Some(2.0), Some(2.0)],
            vec![Some(4.0), Some(4.0)],
        ])
        .unwrap();
        assert!((icc(&m).unwrap().value - 1.0).abs() < 1e-12);
    }
}
