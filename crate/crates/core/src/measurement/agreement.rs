use serde::{Deserialize, Serialize};

use crate::data::{RatingScale, RatingsMatrix};
use crate::error::{Error, Result};
use crate::outcome::Flagged;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaWeights {
    #[default]
    None,
    Linear,
    Quadratic,
}

fn position(values: &[f64], x: f64) -> usize {
    values.iter().position(|&v| v == x).expect("value drawn from the same matrix")
}

/// Cohen's kappa for exactly two raters over items rated by both.
pub fn cohens_kappa(m: &RatingsMatrix, weights: KappaWeights) -> Result<Flagged<f64>> {
    if m.n_raters() != 2 {
        return Err(Error::InvalidInput(format!(
            "cohen's kappa needs exactly two raters, got {}",
            m.n_raters()
        )));
    }
    if weights != KappaWeights::None && m.scale() == RatingScale::Nominal {
        return Err(Error::InvalidInput("weighted kappa requires ordinal or numeric labels".into()));
    }
    let rows = m.complete_rows();
    if rows.is_empty() {
        return Err(Error::Empty("no item was rated by both raters".into()));
    }
    let cats: Vec<f64> = match (m.scale(), m.categories()) {
        (RatingScale::Ordinal, Some(c)) => (0..c.len()).map(|i| i as f64).collect(),
        _ => {
            let mut v: Vec<f64> = rows.iter().flatten().copied().collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        }
    };
    let k = cats.len();
    let n = rows.len() as f64;
    let mut table = vec![vec![0.0; k]; k];
    for r in &rows {
        table[position(&cats, r[0])][position(&cats, r[1])] += 1.0 / n;
    }
    let row_m: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_m: Vec<f64> = (0..k).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let span = (k.max(2) - 1) as f64;
    let w = |i: usize, j: usize| -> f64 {
        let d = (i as f64 - j as f64).abs() / span;
        match weights {
            KappaWeights::None => f64::from(u8::from(i == j)),
            KappaWeights::Linear => 1.0 - d,
            KappaWeights::Quadratic => 1.0 - d * d,
        }
    };
    let (mut po, mut pe) = (0.0, 0.0);
    for i in 0..k {
        for j in 0..k {
            po += w(i, j) * table[i][j];
            pe += w(i, j) * row_m[i] * col_m[j];
        }
    }
    if (1.0 - pe).abs() < 1e-15 {
        return Err(Error::Degenerate("chance agreement is 1: kappa undefined".into()));
    }
    let mut out = Flagged::clean((po - pe) / (1.0 - pe));
    let dropped = m.n_items() - rows.len();
    if dropped > 0 {
        out.warnings.push(format!("{dropped} items without both ratings ignored"));
    }
    Ok(out)
}

/// Fleiss' kappa; every item must carry the same number (≥ 2) of ratings.
pub fn fleiss_kappa(m: &RatingsMatrix) -> Result<f64> {
    let per_item: Vec<Vec<f64>> = m.rows().iter().map(|r| r.iter().flatten().copied().collect()).collect();
    let r = per_item[0].len();
    if per_item.iter().any(|v| v.len() != r) {
        return Err(Error::InvalidInput("fleiss' kappa needs the same number of ratings per item".into()));
    }
    if r < 2 {
        return Err(Error::InvalidInput("fleiss' kappa needs at least two ratings per item".into()));
    }
    let cats = m.distinct_values();
    let k = cats.len();
    let n_items = per_item.len() as f64;
    let rf = r as f64;
    let mut totals = vec![0.0; k];
    let mut p_bar = 0.0;
    for item in &per_item {
        let mut counts = vec![0.0; k];
        for &v in item {
            counts[position(&cats, v)] += 1.0;
        }
        p_bar += (counts.iter().map(|c| c * c).sum::<f64>() - rf) / (rf * (rf - 1.0));
        for (t, c) in totals.iter_mut().zip(&counts) {
            *t += c;
        }
    }
    p_bar /= n_items;
    let pe: f64 = totals.iter().map(|t| (t / (n_items * rf)).powi(2)).sum();
    if (1.0 - pe).abs() < 1e-15 {
        return Err(Error::Degenerate("a single category was used: kappa undefined".into()));
    }
    Ok((p_bar - pe) / (1.0 - pe))
}

/// Kendall's coefficient of concordance W with tie correction. Each rater
/// (column) ranks the items (rows); every item must be rated by every rater.
pub fn kendalls_w(m: &RatingsMatrix) -> Result<f64> {
    let n = m.n_items();
    let k = m.n_raters();
    if n < 2 {
        return Err(Error::InvalidInput("kendall's w needs at least two items".into()));
    }
    if m.rows().iter().flatten().any(Option::is_none) {
        return Err(Error::InvalidInput("kendall's w needs complete rankings".into()));
    }
    let mut rank_sums = vec![0.0; n];
    let mut tie_corr = 0.0;
    for j in 0..k {
        let col: Vec<f64> = (0..n).map(|i| m.get(i, j).unwrap()).collect();
        for (s, r) in rank_sums.iter_mut().zip(stats::midranks(&col)) {
            *s += r;
        }
        tie_corr += stats::tie_sizes(&col).iter().map(|&t| (t * t * t - t) as f64).sum::<f64>();
    }
    let (nf, kf) = (n as f64, k as f64);
    let mean = rank_sums.iter().sum::<f64>() / nf;
    let s: f64 = rank_sums.iter().map(|r| (r - mean).powi(2)).sum();
    let denom = kf * kf * (nf.powi(3) - nf) - kf * tie_corr;
    if denom <= 0.0 {
        return Err(Error::Degenerate("every rater tied all items".into()));
    }
    Ok((12.0 * s / denom).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaLevel {
    #[default]
    Nominal,
    Ordinal,
    Interval,
    Ratio,
}

/// Krippendorff's alpha via the coincidence matrix. Items with fewer than
/// two ratings are not pairable and are skipped.
pub fn krippendorff_alpha(m: &RatingsMatrix, level: AlphaLevel) -> Result<f64> {
    let values = m.distinct_values();
    let k = values.len();
    let mut o = vec![vec![0.0; k]; k];
    let mut pairable = 0usize;
    for row in m.rows() {
        let vals: Vec<usize> = row.iter().flatten().map(|&v| position(&values, v)).collect();
        let mu = vals.len();
        if mu < 2 {
            continue;
        }
        pairable += 1;
        for (a, &c) in vals.iter().enumerate() {
            for (b, &d) in vals.iter().enumerate() {
                if a != b {
                    o[c][d] += 1.0 / (mu as f64 - 1.0);
                }
            }
        }
    }
    if pairable == 0 {
        return Err(Error::InvalidInput("no item has two or more ratings".into()));
    }
    let nc: Vec<f64> = o.iter().map(|r| r.iter().sum()).collect();
    let n: f64 = nc.iter().sum();
    let delta = |c: usize, d: usize| -> f64 {
        let (vc, vd) = (values[c], values[d]);
        match level {
            AlphaLevel::Nominal => f64::from(u8::from(c != d)),
            AlphaLevel::Interval => (vc - vd).powi(2),
            AlphaLevel::Ratio => {
                if vc + vd == 0.0 {
                    0.0
                } else {
                    ((vc - vd) / (vc + vd)).powi(2)
                }
            }
            AlphaLevel::Ordinal => {
                let (lo, hi) = (c.min(d), c.max(d));
                let s: f64 = nc[lo..=hi].iter().sum();
                (s - (nc[c] + nc[d]) / 2.0).powi(2)
            }
        }
    };
    let (mut num, mut den) = (0.0, 0.0);
    for c in 0..k {
        for d in 0..k {
            let dd = delta(c, d);
            num += o[c][d] * dd;
            den += nc[c] * nc[d] * dd;
        }
    }
    if den == 0.0 {
        return Err(Error::Degenerate("no variation in ratings: alpha undefined".into()));
    }
    Ok(1.0 - (n - 1.0) * num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapKind {
    Dice,
    Iou,
}

/// Dice or IoU of two binary masks over the same domain. Two empty masks
/// score 1 by convention.
pub fn overlap(a: &[bool], b: &[bool], kind: OverlapKind) -> Result<Flagged<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(format!("mask sizes {} vs {}", a.len(), b.len())));
    }
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count() as f64;
    let na = a.iter().filter(|x| **x).count() as f64;
    let nb = b.iter().filter(|x| **x).count() as f64;
    if na + nb == 0.0 {
        return Ok(Flagged::warn(1.0, "both masks empty: overlap set to 1"));
    }
    Ok(Flagged::clean(match kind {
        OverlapKind::Dice => 2.0 * inter / (na + nb),
        OverlapKind::Iou => inter / (na + nb - inter),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(rows: &[&[&str]]) -> RatingsMatrix {
        let r: Vec<Vec<Option<&str>>> = rows.iter().map(|r| r.iter().map(|s| Some(*s)).collect()).collect();
        RatingsMatrix::from_categorical(&r).unwrap()
    }

    #[test]
    fn cohen_table_reference() {
        let mut rows: Vec<&[&str]> = Vec::new();
        rows.extend(std::iter::repeat_n(&["a", "a"][..], 20));
        rows.extend(std::iter::repeat_n(&["a", "b"][..], 5));
        rows.extend(std::iter::repeat_n(&["b", "a"][..], 10));
        rows.extend(std::iter::repeat_n(&["b", "b"][..], 15));
        let k = cohens_kappa(&cat(&rows), KappaWeights::None).unwrap().value;
        assert!((k - 0.4).abs() < 1e-12);
    }

    #[test]
    fn perfect_agreement_is_one() {
        let m = cat(&[&["a", "a", "a"], &["b", "b", "b"], &["c", "c", "c"]]);
        assert!((fleiss_kappa(&m).unwrap() - 1.0).abs() < 1e-12);
        assert!((krippendorff_alpha(&m, AlphaLevel::Nominal).unwrap() - 1.0).abs() < 1e-12);
        let r = RatingsMatrix::from_numeric(vec![vec![Some(1.), Some(1.)], vec![Some(2.), Some(2.)], vec![Some(3.), Some(3.)]]).unwrap();
        assert!((kendalls_w(&r).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kendalls_w_reversed_rankings_is_zero() {
        // rank sums are all equal to 4, so S = 0
        let r = RatingsMatrix::from_numeric(vec![vec![Some(1.), Some(3.)], vec![Some(2.), Some(2.)], vec![Some(3.), Some(1.)]]).unwrap();
        assert_eq!(kendalls_w(&r).unwrap(), 0.0);
    }

    #[test]
    fn krippendorff_one_disagreement() {
        // units: (a,a) (a,a) (b,b) (a,b): o_aa = 4, o_bb = 2, o_ab = o_ba = 1, n_a = 5, n_b = 3, n = 8
        // α = 1 − (n−1)·(o_ab + o_ba) / (2·n_a·n_b) = 1 − 7·2/30
        let m = cat(&[&["a", "a"], &["a", "a"], &["b", "b"], &["a", "b"]]);
        let a = krippendorff_alpha(&m, AlphaLevel::Nominal).unwrap();
        assert!((a - (1.0 - 14.0 / 30.0)).abs() < 1e-12);
        let neg = cat(&[&["a", "b"], &["b", "a"], &["a", "b"], &["b", "a"]]);
        assert!(krippendorff_alpha(&neg, AlphaLevel::Nominal).unwrap() < 0.0);
    }

    #[test]
    fn overlap_identity() {
        let a = [true, true, false, false];
        let b = [true, false, true, false];
        let d = overlap(&a, &b, OverlapKind::Dice).unwrap().value;
        let i = overlap(&a, &b, OverlapKind::Iou).unwrap().value;
        assert_eq!(d, 0.5);
        assert!((i - 1.0 / 3.0).abs() < 1e-15);
        assert!((i - d / (2.0 - d)).abs() < 1e-15);
        assert_eq!(overlap(&[false], &[false], OverlapKind::Iou).unwrap().value, 1.0);
    }

    #[test]
    fn single_rater_rejected() {
        let m = cat(&[&["a"], &["b"]]);
        assert!(cohens_kappa(&m, KappaWeights::None).is_err());
        assert!(fleiss_kappa(&m).is_err());
    }
}
