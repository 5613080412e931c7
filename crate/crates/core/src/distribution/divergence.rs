use serde::{Deserialize, Serialize};

use crate::data::{histograms_pooled, Binning, CategoricalCounts, Sample};
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceKind {
    Kl,
    Js,
    Psi,
}

/// Handling of zero probabilities that would make a divergence infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Smoothing {
    Strict,
    /// Add ε to every bin and renormalize.
    Epsilon { epsilon: f64 },
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing::Epsilon {
            epsilon: DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceOutcome {
    pub value: f64,
    pub smoothed: bool,
    pub categories: Vec<String>,
    pub warnings: Vec<String>,
}

fn normalize(c: &[f64]) -> Result<Vec<f64>> {
    let t: f64 = c.iter().sum();
    if !(t > 0.0) {
        return Err(Error::Empty("distribution has zero mass".into()));
    }
    Ok(c.iter().map(|v| v / t).collect())
}

fn needs_smoothing(kind: DivergenceKind, p: &[f64], q: &[f64]) -> bool {
    match kind {
        DivergenceKind::Kl => p.iter().zip(q).any(|(&a, &b)| a > 0.0 && b == 0.0),
        DivergenceKind::Psi => p.iter().zip(q).any(|(&a, &b)| (a == 0.0) != (b == 0.0)),
        DivergenceKind::Js => false,
    }
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).ln())
        .sum()
}

/// Divergence between two probability (or count) vectors over the same bins,
/// in nats.
pub fn divergence(kind: DivergenceKind, p: &[f64], q: &[f64], smoothing: Smoothing) -> Result<DivergenceOutcome> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(format!("{} bins vs {} bins", p.len(), q.len())));
    }
    if p.iter().chain(q).any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidInput("probabilities must be finite and nonnegative".into()));
    }
    let mut p = normalize(p)?;
    let mut q = normalize(q)?;
    let mut warnings = Vec::new();
    let mut smoothed = false;
    if needs_smoothing(kind, &p, &q) {
        match smoothing {
            Smoothing::Strict => {
                return Err(Error::Degenerate(
                    "zero probability in a denominator (strict mode)".into(),
                ))
            }
            Smoothing::Epsilon { epsilon } => {
                if !(epsilon > 0.0) {
                    return Err(Error::param("epsilon", "must be positive"));
                }
                p = normalize(&p.iter().map(|v| v + epsilon).collect::<Vec<_>>())?;
                q = normalize(&q.iter().map(|v| v + epsilon).collect::<Vec<_>>())?;
                smoothed = true;
                warnings.push(format!(
                    "parameter_choice: empty bins smoothed with epsilon = {epsilon:e}"
                ));
            }
        }
    }
    let value = match kind {
        DivergenceKind::Kl => kl(&p, &q),
        DivergenceKind::Js => {
            let m: Vec<f64> = p.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect();
            (0.5 * kl(&p, &m) + 0.5 * kl(&q, &m)).clamp(0.0, std::f64::consts::LN_2)
        }
        DivergenceKind::Psi => p
            .iter()
            .zip(&q)
            .filter(|(&a, &b)| a > 0.0 && b > 0.0)
            .map(|(&a, &b)| (a - b) * (a / b).ln())
            .sum(),
    };
    Ok(DivergenceOutcome {
        value: value.max(0.0),
        smoothed,
        categories: Vec::new(),
        warnings,
    })
}

/// Divergence between categorical distributions aligned on the union of
/// their categories.
pub fn divergence_counts(
    kind: DivergenceKind,
    p: &CategoricalCounts,
    q: &CategoricalCounts,
    smoothing: Smoothing,
) -> Result<DivergenceOutcome> {
    let (cats, a, b) = p.align(q);
    let to_f = |v: Vec<u64>| v.into_iter().map(|c| c as f64).collect::<Vec<_>>();
    let mut out = divergence(kind, &to_f(a), &to_f(b), smoothing)?;
    out.categories = cats;
    Ok(out)
}

/// Divergence between numerical samples binned on shared edges.
pub fn divergence_samples(
    kind: DivergenceKind,
    p: &Sample,
    q: &Sample,
    binning: &Binning,
    smoothing: Smoothing,
) -> Result<(DivergenceOutcome, Vec<f64>)> {
    let h = histograms_pooled(&[p, q], binning)?;
    let mut out = divergence_counts(kind, &h[0].counts, &h[1].counts, smoothing)?;
    out.warnings.splice(0..0, h[0].warnings.iter().cloned());
    Ok((out, h[0].edges.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kl_reference_value() {
        let o = divergence(DivergenceKind::Kl, &[0.5, 0.5], &[0.75, 0.25], Smoothing::Strict).unwrap();
        let oracle = 0.5 * (0.5f64 / 0.75).ln() + 0.5 * (0.5f64 / 0.25).ln();
        assert!((o.value - oracle).abs() < 1e-15);
        assert!((o.value - 0.143841).abs() < 1e-6);
    }

    #[test]
    fn js_disjoint_is_ln2() {
        let o = divergence(DivergenceKind::Js, &[1.0, 0.0], &[0.0, 1.0], Smoothing::Strict).unwrap();
        assert!((o.value - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(!o.smoothed);
    }

    #[test]
    fn strict_mode_errors_and_default_smooths() {
        assert!(divergence(DivergenceKind::Kl, &[1.0, 1.0], &[1.0, 0.0], Smoothing::Strict).is_err());
        let o = divergence(DivergenceKind::Psi, &[1.0, 1.0], &[1.0, 0.0], Smoothing::default()).unwrap();
        assert!(o.smoothed && o.value.is_finite() && o.value > 0.0);
        assert_eq!(o.warnings.len(), 1);
    }

    #[test]
    fn mismatched_bins_rejected() {
        assert!(divergence(DivergenceKind::Js, &[1.0], &[0.5, 0.5], Smoothing::Strict).is_err());
    }
}
