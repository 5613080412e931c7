#![allow(dead_code)]

use dq_core::structure::{littles_mcar_test, page_hinkley, PageHinkleyParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Trivariate normal with pairwise correlation `rho`.
fn correlated(rng: &mut ChaCha8Rng, n: usize, rho: f64) -> Vec<Vec<f64>> {
    let mut cols = vec![Vec::with_capacity(n); 3];
    for _ in 0..n {
        let common: f64 = StandardNormal.sample(rng);
        for c in cols.iter_mut() {
            let e: f64 = StandardNormal.sample(rng);
            c.push(rho.sqrt() * common + (1.0 - rho).sqrt() * e);
        }
    }
    cols
}

fn share(runs: u64, hit: impl Fn(u64) -> bool + Sync) -> f64 {
    (0..runs).into_par_iter().filter(|&s| hit(s)).count() as f64 / runs as f64
}

/// Share of MCAR data sets (20% missing per cell) rejected at 0.05.
pub fn mcar_rejection_rate(runs: u64, n: usize) -> f64 {
    share(runs, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols = correlated(&mut rng, n, 0.5);
        let masked: Vec<Vec<Option<f64>>> = cols
            .iter()
            .map(|c| c.iter().map(|&v| (rng.random::<f64>() >= 0.2).then_some(v)).collect())
            .collect();
        littles_mcar_test(&masked).unwrap().p_value.unwrap() < 0.05
    })
}

/// Share rejected when the top quartile of the first variable is removed.
pub fn mnar_power(runs: u64, n: usize) -> f64 {
    share(runs, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + seed);
        let cols = correlated(&mut rng, n, 0.5);
        let mut sorted = cols[0].clone();
        sorted.sort_by(f64::total_cmp);
        let q3 = sorted[(0.75 * n as f64) as usize];
        let mut masked: Vec<Vec<Option<f64>>> = cols.iter().map(|c| c.iter().map(|&v| Some(v)).collect()).collect();
        for (i, v) in cols[0].iter().enumerate() {
            if *v >= q3 {
                masked[0][i] = None;
            }
        }
        littles_mcar_test(&masked).unwrap().p_value.unwrap() < 0.05
    })
}

/// Share of unit-noise series (n = 1000, +5σ step at 500) alarmed within
/// 60 samples of the step.
pub fn ph_step_detection_rate(runs: u64) -> f64 {
    share(runs, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<f64> = (0..1000)
            .map(|t| {
                let e: f64 = StandardNormal.sample(&mut rng);
                e + if t >= 500 { 5.0 } else { 0.0 }
            })
            .collect();
        let out = page_hinkley(&s, PageHinkleyParams::default()).unwrap();
        out.alarm_indices.iter().any(|&t| t > 500 && t <= 560)
    })
}

/// Share of stationary unit-noise series (n = 1000) with any alarm.
pub fn ph_false_alarm_rate(runs: u64) -> f64 {
    share(runs, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(50_000 + seed);
        let s: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        !page_hinkley(&s, PageHinkleyParams::default()).unwrap().alarm_indices.is_empty()
    })
}

/// Direct transcription of the increase-direction statistic, restarting
/// after each alarm.
pub fn naive_ph_alarms(s: &[f64], delta: f64, lambda: f64) -> Vec<usize> {
    let mut alarms = Vec::new();
    let mut start = 0;
    for t in 0..s.len() {
        let seg = &s[start..=t];
        let m: Vec<f64> = (0..seg.len())
            .scan(0.0, |acc, i| {
                let mean = seg[..=i].iter().sum::<f64>() / (i + 1) as f64;
                *acc += seg[i] - mean - delta;
                Some(*acc)
            })
            .collect();
        let min = m.iter().copied().fold(0.0f64, f64::min);
        if m[m.len() - 1] - min >= lambda {
            alarms.push(t);
            start = t + 1;
        }
    }
    alarms
}
