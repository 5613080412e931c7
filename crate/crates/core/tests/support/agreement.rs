#![allow(dead_code)]

use dq_core::data::RatingsMatrix;
use dq_core::measurement::{cohens_kappa, fleiss_kappa, kendalls_w, krippendorff_alpha, AlphaLevel, KappaWeights};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn labels(rows: Vec<Vec<usize>>) -> RatingsMatrix {
    let rows: Vec<Vec<Option<String>>> =
        rows.into_iter().map(|r| r.into_iter().map(|c| Some(format!("c{c}"))).collect()).collect();
    RatingsMatrix::from_categorical(&rows).unwrap()
}

fn numeric(rows: Vec<Vec<f64>>) -> RatingsMatrix {
    RatingsMatrix::from_numeric(rows.into_iter().map(|r| r.into_iter().map(Some).collect()).collect()).unwrap()
}

pub fn perfect_agreement_is_one() {
    let two = labels((0..40).map(|i| vec![i % 3, i % 3]).collect());
    assert!((cohens_kappa(&two, KappaWeights::None).unwrap().value - 1.0).abs() < 1e-12);
    let four = labels((0..40).map(|i| vec![i % 4; 4]).collect());
    assert!((fleiss_kappa(&four).unwrap() - 1.0).abs() < 1e-12);
    assert!((krippendorff_alpha(&four, AlphaLevel::Nominal).unwrap() - 1.0).abs() < 1e-12);
    // every rater ranks the ten items identically
    let ranks = numeric((0..10).map(|i| vec![i as f64; 5]).collect());
    assert!((kendalls_w(&ranks).unwrap() - 1.0).abs() < 1e-12);
}

pub fn independent_raters_are_near_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 5000;
    let two = labels((0..n).map(|_| vec![rng.random_range(0..3), rng.random_range(0..3)]).collect());
    let k = cohens_kappa(&two, KappaWeights::None).unwrap().value;
    assert!(k.abs() < 0.05, "cohen {k}");
    let many = labels((0..n).map(|_| (0..4).map(|_| rng.random_range(0..3)).collect()).collect());
    let f = fleiss_kappa(&many).unwrap();
    assert!(f.abs() < 0.05, "fleiss {f}");
    let a = krippendorff_alpha(&many, AlphaLevel::Nominal).unwrap();
    assert!(a.abs() < 0.05, "alpha {a}");
    // W's null expectation is 1/m; with m = 5000 raters of 4 items it vanishes
    let ranks = numeric(
        (0..4)
            .map(|_| (0..n).map(|_| rng.random_range(0..4) as f64).collect())
            .collect(),
    );
    let w = kendalls_w(&ranks).unwrap();
    assert!(w.abs() < 0.05, "kendall w {w}");
}

pub fn cohen_hand_computed_table() {
    // [[20, 5], [10, 15]]: po = 0.7, pe = 0.5 · 0.6 + 0.5 · 0.4 = 0.5
    let mut rows = Vec::new();
    rows.extend(std::iter::repeat_n(vec![0, 0], 20));
    rows.extend(std::iter::repeat_n(vec![0, 1], 5));
    rows.extend(std::iter::repeat_n(vec![1, 0], 10));
    rows.extend(std::iter::repeat_n(vec![1, 1], 15));
    let k = cohens_kappa(&labels(rows), KappaWeights::None).unwrap().value;
    assert!((k - 0.4).abs() < 1e-12, "{k}");
}
