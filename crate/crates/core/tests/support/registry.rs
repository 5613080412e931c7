#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use dq_core::registry::{all_cards, render_card, CardFormat, Group};

const SHARED_DIST: &[&str] =
    &["accuracy", "noisy_labels", "homogeneity", "distribution_drift", "variety", "target_class_balance"];
const SHARED_CORR: &[&str] = &["accuracy", "noisy_labels", "feature_importance"];

/// Metric → dimensions, row by row.
fn matrix() -> BTreeMap<&'static str, Vec<&'static str>> {
    let single: &[(&str, &[&str])] = &[
        (
            "accuracy",
            &[
                "entropy",
                "limit_of_detection",
                "limit_of_quantification",
                "systematic_error",
                "random_error",
                "bland_altman_cr",
                "repeatability_cv",
                "reproducibility_variance",
            ],
        ),
        ("noisy_labels", &["cohens_kappa", "fleiss_kappa", "kendalls_w", "krippendorff_alpha", "dice_score", "iou"]),
        ("completeness", &["completeness", "patient_level_completeness", "record_completeness"]),
        ("syntactic_consistency", &["syntactic_accuracy"]),
        ("distribution_drift", &["page_hinkley"]),
        ("dataset_size", &["dataset_size"]),
        ("granularity", &["granularity", "sampling_frequency", "resolution", "label_granularity"]),
        ("target_class_balance", &["imbalance_ratio", "imbalance_degree", "lrid"]),
        ("currency", &["currency_ballou", "currency_li", "currency_hinrichs", "currency_heinrich"]),
        ("uniqueness", &["prevalence_of_duplicates", "effective_sample_size"]),
        ("informative_missingness", &["littles_test", "informative_dropout"]),
    ];
    let dist = [
        "range",
        "interquartile_range",
        "mean_sd",
        "hill_number",
        "mmd",
        "cohens_d",
        "energy_distance",
        "kl_divergence",
        "psi",
        "js_divergence",
        "ks_test",
        "epps_singleton",
        "anderson_darling",
        "chi_squared",
        "fid",
        "kid",
        "mann_whitney_u",
        "wasserstein",
    ];
    let corr = ["pearson", "concordance_cc", "goodman_kruskal_gamma", "kendall_tau", "spearman", "icc", "cramers_v"];
    let mut m = BTreeMap::new();
    for (d, ids) in single {
        for id in *ids {
            m.insert(*id, vec![*d]);
        }
    }
    for id in dist {
        m.insert(id, SHARED_DIST.to_vec());
    }
    for id in corr {
        m.insert(id, SHARED_CORR.to_vec());
    }
    m
}

pub fn registry_matches_metric_dimension_matrix() {
    let t = Instant::now();
    let cards = all_cards();
    assert_eq!(cards.len(), 60);
    let expected = matrix();
    assert_eq!(expected.len(), 60);
    for c in cards {
        let want: BTreeSet<&str> = expected[c.id.as_str()].iter().copied().collect();
        let got: BTreeSet<&str> = c.dimensions.iter().map(|d| d.as_str()).collect();
        assert_eq!(got, want, "{}", c.id);
    }
    let mut sizes = BTreeMap::new();
    for c in cards {
        *sizes.entry(c.group).or_insert(0) += 1;
    }
    let want = [
        (Group::DistributionMetrics, 18),
        (Group::CorrelationCoefficients, 7),
        (Group::MeasurementProcess, 17),
        (Group::Consistency, 2),
        (Group::Representativeness, 8),
        (Group::Informativeness, 4),
        (Group::Timeliness, 4),
    ];
    for (g, n) in want {
        assert_eq!(sizes[&g], n, "{g}");
    }
    assert!(t.elapsed().as_secs_f64() < 1.0);
}

pub fn cards_render_in_both_formats() {
    for c in all_cards() {
        let md = render_card(&c.id, CardFormat::Markdown).unwrap();
        assert!(md.contains(&c.name));
        let js: serde_json::Value = serde_json::from_str(&render_card(&c.id, CardFormat::Json).unwrap()).unwrap();
        assert_eq!(js["id"], c.id.as_str());
    }
    assert!(render_card("no_such_metric", CardFormat::Json).is_err());
}
