#![allow(dead_code)]

use dq_core::data::{Binning, CategoricalCounts, Sample};
use dq_core::distribution::*;
use proptest::prelude::*;
use proptest::test_runner::TestRunner;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn values(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-50i32..50).prop_map(|v| v as f64 / 4.0), len)
}

fn rows(v: &[f64]) -> EmbeddingSet {
    let r: Vec<Vec<f64>> = v.chunks_exact(2).map(|c| c.to_vec()).collect();
    EmbeddingSet::from_rows(&r).unwrap()
}

fn binning() -> Binning {
    Binning::default()
}

pub fn identity_symmetry_and_bounds() {
    let mut runner = TestRunner::new(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(1000) });
    runner
        .run(&(values(4..30), values(4..30)), |(a, b)| {
            let (sa, sb) = (Sample::new(a.clone()), Sample::new(b.clone()));

            for (x, y) in [(&sa, &sa), (&sb, &sb)] {
                prop_assert!(wasserstein_1d(x, y, 1.0).unwrap().abs() < TOL);
                prop_assert!(energy_distance(x, y).unwrap().abs() < TOL);
                prop_assert!(ks_2samp(x, y).unwrap().statistic.abs() < TOL);
                for kind in [DivergenceKind::Kl, DivergenceKind::Js, DivergenceKind::Psi] {
                    let (o, _) =
                        divergence_samples(kind, x, y, &binning(), Smoothing::default()).unwrap();
                    prop_assert!(o.value.abs() < TOL);
                }
            }
            let ea = EmbeddingSet::from_values(&a).unwrap();
            let eb = EmbeddingSet::from_values(&b).unwrap();
            let unit = Kernel::Rbf {
                bandwidth: Some(1.0),
            };
            prop_assert!(mmd(&ea, &ea, unit).unwrap().value.abs() < TOL);

            let w = wasserstein_1d(&sa, &sb, 1.0).unwrap();
            prop_assert!(w >= -TOL);
            prop_assert!((w - wasserstein_1d(&sb, &sa, 1.0).unwrap()).abs() < TOL);
            let e = energy_distance(&sa, &sb).unwrap();
            prop_assert!(e >= -TOL);
            prop_assert!((e - energy_distance(&sb, &sa).unwrap()).abs() < TOL);
            let k = Kernel::Rbf {
                bandwidth: Some(2.0),
            };
            let m = mmd(&ea, &eb, k).unwrap().value;
            prop_assert!(m >= -TOL);
            prop_assert!((m - mmd(&eb, &ea, k).unwrap().value).abs() < TOL);

            let ks = ks_2samp(&sa, &sb).unwrap().statistic;
            prop_assert!((0.0..=1.0).contains(&ks));

            let div = |kind, x: &Sample, y: &Sample| {
                divergence_samples(kind, x, y, &binning(), Smoothing::default())
                    .unwrap()
                    .0
                    .value
            };
            let js = div(DivergenceKind::Js, &sa, &sb);
            prop_assert!((-TOL..=2f64.ln() + 1e-12).contains(&js));
            prop_assert!((js - div(DivergenceKind::Js, &sb, &sa)).abs() < TOL);
            let psi = div(DivergenceKind::Psi, &sa, &sb);
            prop_assert!(psi >= -TOL);
            prop_assert!((psi - div(DivergenceKind::Psi, &sb, &sa)).abs() < 1e-6);
            prop_assert!(div(DivergenceKind::Kl, &sa, &sb) >= -TOL);
            Ok(())
        })
        .unwrap();
}

pub fn frechet_identity_and_symmetry() {
    let mut runner = TestRunner::new(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(1000) });
    runner
        .run(&(values(12..40), values(12..40)), |(a, b)| {
            let (ea, eb) = (rows(&a), rows(&b));
            prop_assert!(frechet_gaussian(&ea, &ea).unwrap().value.abs() < 1e-6);
            let f = frechet_gaussian(&ea, &eb).unwrap().value;
            prop_assert!(f >= -1e-6);
            prop_assert!(
                (f - frechet_gaussian(&eb, &ea).unwrap().value).abs() < 1e-6 * f.abs().max(1.0)
            );
            Ok(())
        })
        .unwrap();
}

pub fn hill_lies_between_one_and_k() {
    let mut runner = TestRunner::new(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(1000) });
    runner
        .run(
            &(prop::collection::vec(1u64..500, 1..12), 0.0f64..4.0),
            |(counts, q)| {
                let c: CategoricalCounts = counts
                    .iter()
                    .enumerate()
                    .map(|(i, &n)| (format!("c{i}"), n))
                    .collect();
                let h = hill_number(&c, q).unwrap();
                prop_assert!(h >= 1.0 - TOL && h <= counts.len() as f64 + TOL, "{h}");
                Ok(())
            },
        )
        .unwrap();
}

pub fn kl_is_asymmetric() {
    let p = [0.9, 0.1];
    let q = [0.5, 0.5];
    let pq = divergence(DivergenceKind::Kl, &p, &q, Smoothing::Strict)
        .unwrap()
        .value;
    let qp = divergence(DivergenceKind::Kl, &q, &p, Smoothing::Strict)
        .unwrap()
        .value;
    assert!((pq - qp).abs() > 1e-3);
}

/// Two-sided p-value by enumerating every split of the pooled values.
fn mwu_brute_force(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (n, total) = (a.len(), pooled.len());
    let u = |x: &[f64], y: &[f64]| -> f64 {
        x.iter()
            .flat_map(|&xi| {
                y.iter().map(move |&yj| {
                    if xi > yj {
                        1.0
                    } else if xi == yj {
                        0.5
                    } else {
                        0.0
                    }
                })
            })
            .sum()
    };
    let observed = u(a, b);
    let (mut le, mut ge, mut count) = (0.0, 0.0, 0.0);
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let (x, y): (Vec<f64>, Vec<f64>) = {
            let mut x = Vec::new();
            let mut y = Vec::new();
            for (i, &v) in pooled.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    x.push(v)
                } else {
                    y.push(v)
                }
            }
            (x, y)
        };
        let s = u(&x, &y);
        count += 1.0;
        if s <= observed + 1e-9 {
            le += 1.0;
        }
        if s >= observed - 1e-9 {
            ge += 1.0;
        }
    }
    (2.0 * f64::min(le, ge) / count).min(1.0)
}

pub fn mwu_exact_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=6 {
        for m in 1..=6 {
            for _ in 0..4 {
                let a: Vec<f64> = (0..n).map(|_| rng.random_range(0..8) as f64).collect();
                let b: Vec<f64> = (0..m).map(|_| rng.random_range(0..8) as f64).collect();
                let got = mann_whitney_u(&Sample::new(a.clone()), &Sample::new(b.clone())).unwrap();
                let want = mwu_brute_force(&a, &b);
                assert!(
                    (got.p_value.unwrap() - want).abs() < 1e-9,
                    "{a:?} {b:?}: {:?} vs {want}",
                    got.p_value
                );
            }
        }
    }
}

pub fn wasserstein_equals_sorted_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let n = rng.random_range(1..60);
        let mut a: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let mut b: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..15.0)).collect();
        let got = wasserstein_1d(&Sample::new(a.clone()), &Sample::new(b.clone()), 1.0).unwrap();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let want = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / n as f64;
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}
