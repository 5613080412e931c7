use nalgebra::{DMatrix, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::data::{quantile_sorted, CategoricalCounts, Sample};
use crate::error::{Error, Result};
use crate::stats;

/// Largest sample size at which Mann-Whitney U uses the exact null distribution.
pub const MWU_EXACT_MAX: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    /// `None` when no reliable p-value is available.
    pub p_value: Option<f64>,
    pub method: String,
    pub sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl TestOutcome {
    fn new(statistic: f64, p_value: Option<f64>, method: &str, sizes: Vec<usize>) -> Self {
        TestOutcome {
            statistic,
            p_value: p_value.map(|p| p.clamp(0.0, 1.0)),
            method: method.to_string(),
            sizes,
            df: None,
            warnings: Vec::new(),
        }
    }
}

fn nonempty(s: &Sample, what: &str) -> Result<()> {
    if s.is_empty() {
        Err(Error::Empty(format!("{what} needs nonempty samples")))
    } else {
        Ok(())
    }
}

/// Kolmogorov distribution survival function Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// (Stephens' small-sample adjustment of the argument).
pub fn ks_2samp(a: &Sample, b: &Sample) -> Result<TestOutcome> {
    nonempty(a, "ks test")?;
    nonempty(b, "ks test")?;
    let (sa, sb) = (a.sorted(), b.sorted());
    let (n, m) = (sa.len(), sb.len());
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < n && j < m {
        let x = sa[i].min(sb[j]);
        while i < n && sa[i] <= x {
            i += 1;
        }
        while j < m && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    let p = kolmogorov_sf((en + 0.12 + 0.11 / en) * d);
    Ok(TestOutcome::new(d, Some(p), "ks_asymptotic", vec![n, m]))
}

/// Mann-Whitney U for `a` (U = #(a > b) + ½ #ties), two-sided. Exact null
/// distribution over pooled midranks when both sizes are at most
/// [`MWU_EXACT_MAX`], tie-corrected normal approximation with continuity
/// correction otherwise.
pub fn mann_whitney_u(a: &Sample, b: &Sample) -> Result<TestOutcome> {
    nonempty(a, "mann-whitney u")?;
    nonempty(b, "mann-whitney u")?;
    let (n, m) = (a.len(), b.len());
    let mut pooled = a.values().to_vec();
    pooled.extend_from_slice(b.values());
    let ranks = stats::midranks(&pooled);
    let r_a: f64 = ranks[..n].iter().sum();
    let u = r_a - (n * (n + 1)) as f64 / 2.0;
    if n.max(m) <= MWU_EXACT_MAX {
        let p = mwu_exact_p(&ranks, n, r_a);
        return Ok(TestOutcome::new(u, Some(p), "mwu_exact", vec![n, m]));
    }
    let big_n = (n + m) as f64;
    let tie_term: f64 = stats::tie_sizes(&pooled)
        .into_iter()
        .map(|t| (t * t * t - t) as f64)
        .sum::<f64>()
        / (big_n * (big_n - 1.0));
    let mu = (n * m) as f64 / 2.0;
    let sigma = ((n * m) as f64 / 12.0 * ((big_n + 1.0) - tie_term)).sqrt();
    let p = if sigma == 0.0 {
        1.0
    } else {
        let z = ((u - mu).abs() - 0.5).max(0.0) / sigma;
        2.0 * stats::normal_sf(z)
    };
    Ok(TestOutcome::new(u, Some(p.min(1.0)), "mwu_normal", vec![n, m]))
}

/// Two-sided exact p-value: rank sums of all size-`n` subsets of the pooled
/// midranks, counted by dynamic programming on doubled (integer) ranks.
fn mwu_exact_p(ranks: &[f64], n: usize, r_obs: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    // ways[k][s]: subsets of size k with doubled rank sum s
    let mut ways = vec![vec![0.0f64; max_sum + 1]; n + 1];
    ways[0][0] = 1.0;
    for &r in &doubled {
        for k in (1..=n).rev() {
            for s in (r..=max_sum).rev() {
                let add = ways[k - 1][s - r];
                if add != 0.0 {
                    ways[k][s] += add;
                }
            }
        }
    }
    let obs = (2.0 * r_obs).round() as usize;
    let total: f64 = ways[n].iter().sum();
    let lower: f64 = ways[n][..=obs].iter().sum();
    let upper: f64 = ways[n][obs..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

/// k-sample Anderson-Darling test (midrank version for data with ties).
/// The statistic is standardized; the p-value is interpolated from the
/// critical-value table and capped to [0.001, 0.25].
pub fn anderson_darling_k(samples: &[&Sample]) -> Result<TestOutcome> {
    let k = samples.len();
    if k < 2 {
        return Err(Error::InvalidInput("anderson-darling needs at least two samples".into()));
    }
    for s in samples {
        nonempty(s, "anderson-darling")?;
    }
    let sizes: Vec<usize> = samples.iter().map(|s| s.len()).collect();
    let mut z: Vec<f64> = samples.iter().flat_map(|s| s.values().iter().copied()).collect();
    z.sort_by(f64::total_cmp);
    let big_n = z.len();
    if big_n < 4 {
        return Err(Error::InvalidInput("anderson-darling needs at least four observations".into()));
    }
    let mut zstar = z.clone();
    zstar.dedup();
    if zstar.len() < 2 {
        return Err(Error::Degenerate("all observations are identical".into()));
    }
    let nf = big_n as f64;
    let left = |v: &[f64], x: f64| v.partition_point(|&y| y < x) as f64;
    let right = |v: &[f64], x: f64| v.partition_point(|&y| y <= x) as f64;

    let mut a2akn = 0.0;
    for s in samples {
        let sorted = s.sorted();
        let ni = sorted.len() as f64;
        let mut inner = 0.0;
        for &x in &zstar {
            let zl = left(&z, x);
            let lj = right(&z, x) - zl;
            let bj = zl + lj / 2.0;
            let fij = right(&sorted, x) - left(&sorted, x);
            let mij = right(&sorted, x) - fij / 2.0;
            inner += lj / nf * (nf * mij - bj * ni).powi(2) / (bj * (nf - bj) - nf * lj / 4.0);
        }
        a2akn += inner / ni;
    }
    a2akn *= (nf - 1.0) / nf;

    let kf = k as f64;
    let h_inv: f64 = sizes.iter().map(|&n| 1.0 / n as f64).sum();
    // hs_cs[i] = Σ_{j=N−1−i}^{N−1} 1/j for the descending sequence N−1 … 2
    let mut hs_cs = Vec::with_capacity(big_n.saturating_sub(2));
    let mut acc = 0.0;
    for j in (2..big_n).rev() {
        acc += 1.0 / j as f64;
        hs_cs.push(acc);
    }
    let h = hs_cs.last().copied().unwrap_or(0.0) + 1.0;
    let g: f64 = hs_cs.iter().zip(2..big_n).map(|(c, d)| c / d as f64).sum();
    let a = (4.0 * g - 6.0) * (kf - 1.0) + (10.0 - 6.0 * g) * h_inv;
    let b = (2.0 * g - 4.0) * kf * kf + 8.0 * h * kf + (2.0 * g - 14.0 * h - 4.0) * h_inv - 8.0 * h + 4.0 * g - 6.0;
    let c = (6.0 * h + 2.0 * g - 2.0) * kf * kf + (4.0 * h - 4.0 * g + 6.0) * kf + (2.0 * h - 6.0) * h_inv + 4.0 * h;
    let d = (2.0 * h + 6.0) * kf * kf - 4.0 * h * kf;
    let sigmasq = (a * nf.powi(3) + b * nf * nf + c * nf + d) / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0));
    let m = kf - 1.0;
    let a2 = (a2akn - m) / sigmasq.sqrt();

    let b0 = [0.675, 1.281, 1.645, 1.96, 2.326, 2.573, 3.085];
    let b1 = [-0.245, 0.25, 0.678, 1.149, 1.822, 2.364, 3.615];
    let b2 = [-0.105, -0.305, -0.362, -0.391, -0.396, -0.345, -0.154];
    let sig = [0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.001];
    let critical: Vec<f64> = (0..7).map(|i| b0[i] + b1[i] / m.sqrt() + b2[i] / m).collect();

    let mut out = TestOutcome::new(a2, None, "anderson_darling_k_midrank", sizes);
    let (cmin, cmax) = (critical[0], critical[6]);
    let p = if a2 < cmin {
        out.warnings.push("p-value capped: true value larger than 0.25".into());
        0.25
    } else if a2 > cmax {
        out.warnings.push("p-value floored: true value smaller than 0.001".into());
        0.001
    } else {
        let coef = quadratic_fit(&critical, &sig.map(f64::ln));
        (coef[0] * a2 * a2 + coef[1] * a2 + coef[2]).exp()
    };
    out.p_value = Some(p);
    Ok(out)
}

/// Least-squares coefficients [c2, c1, c0] of y ≈ c2 x² + c1 x + c0.
fn quadratic_fit(x: &[f64], y: &[f64]) -> [f64; 3] {
    let mut ata = Matrix3::zeros();
    let mut aty = Vector3::zeros();
    for (&xi, &yi) in x.iter().zip(y) {
        let row = Vector3::new(xi * xi, xi, 1.0);
        ata += row * row.transpose();
        aty += row * yi;
    }
    let c = ata.lu().solve(&aty).unwrap_or_else(Vector3::zeros);
    [c[0], c[1], c[2]]
}

/// Epps-Singleton test on the empirical characteristic function at
/// t = (0.4, 0.8) scaled by the semi-interquartile range of the pooled data.
pub fn epps_singleton(a: &Sample, b: &Sample) -> Result<TestOutcome> {
    let (nx, ny) = (a.len(), b.len());
    if nx < 5 || ny < 5 {
        return Err(Error::InvalidInput("epps-singleton needs at least five values per sample".into()));
    }
    let mut pooled = a.values().to_vec();
    pooled.extend_from_slice(b.values());
    pooled.sort_by(f64::total_cmp);
    let sigma = (quantile_sorted(&pooled, 0.75) - quantile_sorted(&pooled, 0.25)) / 2.0;
    if sigma <= 0.0 {
        return Err(Error::Degenerate("pooled interquartile range is zero".into()));
    }
    let ts = [0.4 / sigma, 0.8 / sigma];
    let features = |v: &[f64]| -> DMatrix<f64> {
        DMatrix::from_fn(v.len(), 4, |i, j| {
            let t = ts[j % 2];
            if j < 2 {
                (t * v[i]).cos()
            } else {
                (t * v[i]).sin()
            }
        })
    };
    let (gx, gy) = (features(a.values()), features(b.values()));
    let biased_cov = |g: &DMatrix<f64>| -> DMatrix<f64> {
        let mu = g.row_mean();
        let mut c = g.clone();
        for mut r in c.row_iter_mut() {
            r -= &mu;
        }
        c.transpose() * &c / g.nrows() as f64
    };
    let n = (nx + ny) as f64;
    let est = biased_cov(&gx) * (n / nx as f64) + biased_cov(&gy) * (n / ny as f64);
    let eig = SymmetricEigen::new(est);
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let cut = lmax * 4.0 * f64::EPSILON * 4.0;
    let rank = eig.eigenvalues.iter().filter(|&&l| l > cut).count();
    let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| if l > cut { 1.0 / l } else { 0.0 }));
    let pinv = &eig.eigenvectors * inv_diag * eig.eigenvectors.transpose();
    let diff = gx.row_mean().transpose() - gy.row_mean().transpose();
    let mut w = n * (diff.transpose() * pinv * &diff)[(0, 0)];
    let mut out_warn = Vec::new();
    if rank < 4 {
        out_warn.push("estimated covariance matrix does not have full rank".to_string());
    }
    if nx.max(ny) < 25 {
        let corr = 1.0 / (1.0 + n.powf(-0.45) + 10.1 * ((nx as f64).powf(-1.7) + (ny as f64).powf(-1.7)));
        w *= corr;
    }
    if nx.min(ny) < 25 {
        out_warn.push("sample size below 25: asymptotic p-value may be unreliable".into());
    }
    let p = if rank == 0 { None } else { Some(stats::chi2_sf(w, rank as f64)) };
    let mut out = TestOutcome::new(w, p, "epps_singleton", vec![nx, ny]);
    out.df = Some(rank as f64);
    out.warnings = out_warn;
    Ok(out)
}

/// Chi-squared test of homogeneity for two categorical distributions.
pub fn chi_squared(a: &CategoricalCounts, b: &CategoricalCounts) -> Result<TestOutcome> {
    let (cats, ca, cb) = a.align(b);
    let (ta, tb) = (ca.iter().sum::<u64>() as f64, cb.iter().sum::<u64>() as f64);
    if ta == 0.0 || tb == 0.0 {
        return Err(Error::Empty("chi-squared needs nonempty counts on both sides".into()));
    }
    if cats.len() < 2 {
        return Err(Error::Degenerate("chi-squared needs at least two categories".into()));
    }
    let total = ta + tb;
    let mut stat = 0.0;
    for (i, cat) in cats.iter().enumerate() {
        let col = (ca[i] + cb[i]) as f64;
        if col == 0.0 {
            return Err(Error::Degenerate(format!("expected count 0 for category `{cat}`")));
        }
        for (obs, row) in [(ca[i] as f64, ta), (cb[i] as f64, tb)] {
            let e = row * col / total;
            stat += (obs - e).powi(2) / e;
        }
    }
    let df = (cats.len() - 1) as f64;
    let mut out = TestOutcome::new(stat, Some(stats::chi2_sf(stat, df)), "chi_squared", vec![ta as usize, tb as usize]);
    out.df = Some(df);
    Ok(out)
}
