use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::embedding::EmbeddingSet;
use crate::data::{quantile_sorted, Sample};
use crate::error::{Error, Result};

/// Pooled points above which the median heuristic runs on a strided subset.
const MEDIAN_HEURISTIC_CAP: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    /// exp(−‖x−y‖² / 2σ²); `None` selects σ by the median heuristic.
    Rbf { bandwidth: Option<f64> },
    /// (x·y / d + coef)^degree
    Polynomial { degree: u32, coef: f64 },
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::Rbf { bandwidth: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelOutcome {
    pub value: f64,
    /// Bandwidth actually used by an RBF kernel.
    pub bandwidth: Option<f64>,
    pub warnings: Vec<String>,
}

fn rows(e: &EmbeddingSet) -> Vec<Vec<f64>> {
    (0..e.n()).map(|i| e.row(i)).collect()
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn check_dims(a: &EmbeddingSet, b: &EmbeddingSet) -> Result<()> {
    if a.d() != b.d() {
        return Err(Error::LengthMismatch(format!(
            "embedding dimensions differ ({} vs {})",
            a.d(),
            b.d()
        )));
    }
    Ok(())
}

/// Median of pooled pairwise Euclidean distances.
pub fn median_heuristic(a: &EmbeddingSet, b: &EmbeddingSet, warnings: &mut Vec<String>) -> f64 {
    let mut pooled = rows(a);
    pooled.extend(rows(b));
    if pooled.len() > MEDIAN_HEURISTIC_CAP {
        let stride = pooled.len().div_ceil(MEDIAN_HEURISTIC_CAP);
        pooled = pooled.into_iter().step_by(stride).collect();
        warnings.push(format!(
            "median heuristic computed on every {stride}th pooled point ({} points)",
            pooled.len()
        ));
    }
    let mut d: Vec<f64> = (0..pooled.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let p = &pooled;
            (i + 1..p.len()).map(move |j| sq_dist(&p[i], &p[j]).sqrt())
        })
        .collect();
    d.sort_by(f64::total_cmp);
    let med = quantile_sorted(&d, 0.5);
    if med > 0.0 {
        return med;
    }
    let nonzero: Vec<f64> = d.into_iter().filter(|&x| x > 0.0).collect();
    if nonzero.is_empty() {
        warnings.push("all pooled points coincide; bandwidth set to 1".into());
        1.0
    } else {
        warnings.push("median pairwise distance is zero; using mean of nonzero distances".into());
        nonzero.iter().sum::<f64>() / nonzero.len() as f64
    }
}

struct Resolved {
    kernel: Kernel,
    d: f64,
}

impl Resolved {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.kernel {
            Kernel::Rbf { bandwidth } => {
                let s = bandwidth.unwrap_or(1.0);
                (-sq_dist(x, y) / (2.0 * s * s)).exp()
            }
            Kernel::Polynomial { degree, coef } => (dot(x, y) / self.d + coef).powi(degree as i32),
        }
    }

    /// Σ_i Σ_j k(x_i, y_j), optionally skipping i == j.
    fn block_sum(&self, x: &[Vec<f64>], y: &[Vec<f64>], skip_diag: bool) -> f64 {
        x.par_iter()
            .enumerate()
            .map(|(i, xi)| {
                y.iter()
                    .enumerate()
                    .filter(|&(j, _)| !(skip_diag && i == j))
                    .map(|(_, yj)| self.eval(xi, yj))
                    .sum::<f64>()
            })
            .sum()
    }
}

fn resolve(kernel: Kernel, a: &EmbeddingSet, b: &EmbeddingSet, warnings: &mut Vec<String>) -> Result<Resolved> {
    let kernel = match kernel {
        Kernel::Rbf { bandwidth: Some(s) } if !(s > 0.0) || !s.is_finite() => {
            return Err(Error::param("bandwidth", "must be positive"));
        }
        Kernel::Rbf { bandwidth: None } => Kernel::Rbf {
            bandwidth: Some(median_heuristic(a, b, warnings)),
        },
        k => k,
    };
    Ok(Resolved { kernel, d: a.d() as f64 })
}

/// Biased estimate of the maximum mean discrepancy, reported as √MMD².
pub fn mmd(a: &EmbeddingSet, b: &EmbeddingSet, kernel: Kernel) -> Result<KernelOutcome> {
    check_dims(a, b)?;
    let mut warnings = Vec::new();
    let k = resolve(kernel, a, b, &mut warnings)?;
    let (x, y) = (rows(a), rows(b));
    let (n, m) = (x.len() as f64, y.len() as f64);
    let mmd2 = k.block_sum(&x, &x, false) / (n * n) + k.block_sum(&y, &y, false) / (m * m)
        - 2.0 * k.block_sum(&x, &y, false) / (n * m);
    Ok(KernelOutcome {
        value: mmd2.max(0.0).sqrt(),
        bandwidth: match k.kernel {
            Kernel::Rbf { bandwidth } => bandwidth,
            Kernel::Polynomial { .. } => None,
        },
        warnings,
    })
}

/// Kernel inception distance: unbiased MMD² with the polynomial kernel
/// (x·y/d + coef)^degree. May be slightly negative near zero.
pub fn kid(a: &EmbeddingSet, b: &EmbeddingSet, degree: u32, coef: f64) -> Result<KernelOutcome> {
    check_dims(a, b)?;
    let mut warnings = Vec::new();
    if a.n() <= a.d() || b.n() <= b.d() {
        warnings.push("fewer vectors than dimensions".into());
    }
    let k = Resolved {
        kernel: Kernel::Polynomial { degree, coef },
        d: a.d() as f64,
    };
    let (x, y) = (rows(a), rows(b));
    let (n, m) = (x.len() as f64, y.len() as f64);
    let v = k.block_sum(&x, &x, true) / (n * (n - 1.0)) + k.block_sum(&y, &y, true) / (m * (m - 1.0))
        - 2.0 * k.block_sum(&x, &y, false) / (n * m);
    Ok(KernelOutcome {
        value: v,
        bandwidth: None,
        warnings,
    })
}

/// Σ_{i<j} |x_j − x_i| for sorted x.
fn within_abs_sum(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(k, &x)| x * (2.0 * k as f64 - n + 1.0))
        .sum()
}

/// Σ_i Σ_j |a_i − b_j| for sorted inputs.
fn cross_abs_sum(a: &[f64], b: &[f64]) -> f64 {
    let total_b: f64 = b.iter().sum();
    let m = b.len() as f64;
    let (mut c, mut prefix, mut acc) = (0usize, 0.0, 0.0);
    for &x in a {
        while c < b.len() && b[c] <= x {
            prefix += b[c];
            c += 1;
        }
        let cf = c as f64;
        acc += x * cf - prefix + (total_b - prefix) - x * (m - cf);
    }
    acc
}

/// Energy distance 2E|X−Y| − E|X−X′| − E|Y−Y′| over all ordered pairs
/// (V-statistic), computed in O(n log n).
pub fn energy_distance(a: &Sample, b: &Sample) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("energy distance needs nonempty samples".into()));
    }
    let (sa, sb) = (a.sorted(), b.sorted());
    let (n, m) = (sa.len() as f64, sb.len() as f64);
    let e = 2.0 * cross_abs_sum(&sa, &sb) / (n * m)
        - 2.0 * within_abs_sum(&sa) / (n * n)
        - 2.0 * within_abs_sum(&sb) / (m * m);
    Ok(e.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(v: &[f64]) -> EmbeddingSet {
        EmbeddingSet::from_values(v).unwrap()
    }

    #[test]
    fn energy_examples() {
        let s = |v: &[f64]| Sample::new(v.to_vec());
        assert_eq!(energy_distance(&s(&[0.0]), &s(&[1.0])).unwrap(), 2.0);
        assert!((energy_distance(&s(&[0.0, 1.0]), &s(&[1.0, 2.0])).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(energy_distance(&s(&[3.0, 1.0, 2.0]), &s(&[1.0, 2.0, 3.0])).unwrap(), 0.0);
    }

    #[test]
    fn mmd_identity_and_bandwidth() {
        let a = emb(&[0.0, 1.0, 2.0, 5.0]);
        let out = mmd(&a, &a, Kernel::default()).unwrap();
        assert!(out.value.abs() < 1e-7);
        assert!(out.bandwidth.unwrap() > 0.0);
        assert!(mmd(&a, &a, Kernel::Rbf { bandwidth: Some(0.0) }).is_err());
    }

    #[test]
    fn kid_linear_kernel_matches_mean_difference() {
        // degree 1, coef 0: unbiased estimate equals ‖μa−μb‖²/d minus within-set corrections
        let a = emb(&[0.0, 2.0]);
        let b = emb(&[1.0, 3.0]);
        let v = kid(&a, &b, 1, 0.0).unwrap().value;
        // xx off-diagonal: 0*2*2/2 = 0; yy: 3*2/2 = 3; xy: (0+0+2+6)/4 = 2
        assert!((v - (0.0 + 3.0 - 4.0)).abs() < 1e-12);
    }
}
