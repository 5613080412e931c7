use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::embedding::EmbeddingSet;
use crate::data::Sample;
use crate::error::{Error, Result};

/// Relative tolerance below which negative eigenvalues are treated as zero.
const EIG_TOL: f64 = 1e-10;

/// p-Wasserstein distance between two empirical distributions on the line,
/// integrating |F⁻¹(u) − G⁻¹(u)|^p over the merged quantile breakpoints.
pub fn wasserstein_1d(a: &Sample, b: &Sample, order: f64) -> Result<f64> {
    if !(order >= 1.0) || !order.is_finite() {
        return Err(Error::param("order", "must be >= 1"));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("wasserstein distance needs nonempty samples".into()));
    }
    let (sa, sb) = (a.sorted(), b.sorted());
    let (n, m) = (sa.len() as u128, sb.len() as u128);
    // positions are measured in units of 1/(n·m)
    let (mut i, mut j, mut pos, mut acc) = (0usize, 0usize, 0u128, 0.0f64);
    while i < sa.len() && j < sb.len() {
        let next_a = (i as u128 + 1) * m;
        let next_b = (j as u128 + 1) * n;
        let next = next_a.min(next_b);
        acc += (next - pos) as f64 * (sa[i] - sb[j]).abs().powf(order);
        pos = next;
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
    }
    Ok((acc / (n * m) as f64).powf(1.0 / order))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrechetOutcome {
    pub value: f64,
    pub warnings: Vec<String>,
}

fn clipped_eigen(m: DMatrix<f64>, what: &str, warnings: &mut Vec<String>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let sym = (&m + m.transpose()) * 0.5;
    let mut eig = SymmetricEigen::new(sym);
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs())).max(1.0);
    let mut worst = 0.0f64;
    for l in eig.eigenvalues.iter_mut() {
        if *l < 0.0 {
            worst = worst.min(*l);
            *l = 0.0;
        }
    }
    if worst < -EIG_TOL * scale {
        warnings.push(format!("{what}: negative eigenvalue {worst:e} clipped to 0"));
    }
    eig
}

/// Fréchet distance between Gaussian fits of two embedding sets:
/// ‖μa − μb‖² + tr(Σa + Σb − 2 (Σa^{1/2} Σb Σa^{1/2})^{1/2}).
pub fn frechet_gaussian(a: &EmbeddingSet, b: &EmbeddingSet) -> Result<FrechetOutcome> {
    if a.d() != b.d() {
        return Err(Error::LengthMismatch(format!(
            "embedding dimensions differ ({} vs {})",
            a.d(),
            b.d()
        )));
    }
    let mut warnings = Vec::new();
    if a.n() <= a.d() || b.n() <= b.d() {
        warnings.push("fewer vectors than dimensions: covariance is singular".into());
    }
    let (ca, cb) = (a.covariance(), b.covariance());
    let ea = clipped_eigen(ca.clone(), "covariance", &mut warnings);
    let sqrt_a = &ea.eigenvectors
        * DMatrix::from_diagonal(&ea.eigenvalues.map(f64::sqrt))
        * ea.eigenvectors.transpose();
    let inner = &sqrt_a * &cb * &sqrt_a;
    let ei = clipped_eigen(inner, "covariance product", &mut warnings);
    let tr_sqrt: f64 = ei.eigenvalues.iter().map(|l| l.sqrt()).sum();
    let dmu = a.mean() - b.mean();
    let value = dmu.dot(&dmu) + ca.trace() + cb.trace() - 2.0 * tr_sqrt;
    Ok(FrechetOutcome {
        value: value.max(0.0),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Sample {
        Sample::new(v.to_vec())
    }

    #[test]
    fn wasserstein_examples() {
        assert_eq!(wasserstein_1d(&s(&[0.0]), &s(&[1.0]), 1.0).unwrap(), 1.0);
        assert_eq!(wasserstein_1d(&s(&[1.0, 2.0, 3.0]), &s(&[2.0, 3.0, 4.0]), 1.0).unwrap(), 1.0);
        assert_eq!(wasserstein_1d(&s(&[3.0, 1.0]), &s(&[1.0, 3.0]), 1.0).unwrap(), 0.0);
        // unequal sizes: [0,1] vs [0]: half the mass moves distance 1
        assert_eq!(wasserstein_1d(&s(&[0.0, 1.0]), &s(&[0.0]), 1.0).unwrap(), 0.5);
        assert!(wasserstein_1d(&s(&[0.0]), &s(&[1.0]), 0.5).is_err());
    }

    #[test]
    fn frechet_one_dimensional_closed_form() {
        // fitted (μ, σ) = (0, 1) and (1, 1)
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = EmbeddingSet::from_values(&[-h, h]).unwrap();
        let b = EmbeddingSet::from_values(&[1.0 - h, 1.0 + h]).unwrap();
        assert!((frechet_gaussian(&a, &b).unwrap().value - 1.0).abs() < 1e-12);
        assert!(frechet_gaussian(&a, &a).unwrap().value.abs() < 1e-8);
    }
}
