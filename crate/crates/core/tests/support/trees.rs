#![allow(dead_code)]

use std::collections::BTreeSet;

use dq_core::registry::{all_cards, Dimension};
use dq_core::selection::{builtin_trees, select_all, tree, Mode, Node, UseCaseProfile};

type Edges = &'static [(&'static str, &'static str)];

/// Question node: id, key, text, answer → child.
struct Q(&'static str, &'static str, &'static str, Edges);
/// Leaf: id, metrics, subtree → context.
struct L(&'static str, &'static [&'static str], Edges);

struct Fixture {
    name: &'static str,
    root: &'static str,
    questions: &'static [Q],
    leaves: &'static [L],
}

const DIST: &str = "distribution_metrics";
const CORR: &str = "correlation_coefficients";

const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "accuracy",
        root: "ground_truth",
        questions: &[
            Q("ground_truth", "ground_truth", "Does a ground truth exist?", &[("no", "blank_sample"), ("yes", "ground_truth_kind")]),
            Q("blank_sample", "blank_sample", "Is a blank sample measurement available?", &[("yes", "detection_limits"), ("no", "entropy")]),
            Q(
                "ground_truth_kind",
                "ground_truth_kind",
                "What kind of ground truth is available?",
                &[("reference measurement", "instrument_error"), ("repeated measurements", "measurement_conditions")],
            ),
            Q(
                "measurement_conditions",
                "measurement_conditions",
                "Were the repeated measurements taken under changing conditions?",
                &[("no", "repeatability"), ("yes", "reproducibility")],
            ),
        ],
        leaves: &[
            L("detection_limits", &["limit_of_detection", "limit_of_quantification"], &[]),
            L("entropy", &["entropy"], &[]),
            L(
                "instrument_error",
                &["systematic_error", "random_error"],
                &[(CORR, "Reference measurement as comparison"), (DIST, "Reference measurement as reference")],
            ),
            L(
                "repeatability",
                &["bland_altman_cr", "repeatability_cv"],
                &[(CORR, "Repeated measurements as comparison"), (DIST, "Repeated measurements as reference")],
            ),
            L("reproducibility", &["reproducibility_variance"], &[(CORR, "Repeated measurements as comparison")]),
        ],
    },
    Fixture {
        name: "noisy_labels",
        root: "annotator_count",
        questions: &[
            Q(
                "annotator_count",
                "annotator_count",
                "How many annotators have labeled your dataset?",
                &[("one", "single_rater"), ("two", "label_task_two"), ("multiple", "label_task_multiple")],
            ),
            Q(
                "label_task_two",
                "label_task",
                "Which kind of labels were given?",
                &[("classification", "two_raters"), ("segmentation", "overlap"), ("ranking", "ranking")],
            ),
            Q(
                "label_task_multiple",
                "label_task",
                "Which kind of labels were given?",
                &[("classification", "multiple_raters"), ("segmentation", "overlap"), ("ranking", "ranking")],
            ),
        ],
        leaves: &[
            L("single_rater", &[], &[]),
            L(
                "two_raters",
                &["cohens_kappa", "krippendorff_alpha"],
                &[(DIST, "Rating distributions as comparison"), (CORR, "Inter-rater correlation")],
            ),
            L(
                "multiple_raters",
                &["fleiss_kappa", "krippendorff_alpha"],
                &[(DIST, "Rating distributions as comparison"), (CORR, "Inter-rater correlation")],
            ),
            L("overlap", &["dice_score", "iou"], &[]),
            L("ranking", &["kendalls_w"], &[]),
        ],
    },
    Fixture {
        name: "completeness",
        root: "completeness_interest",
        questions: &[Q(
            "completeness_interest",
            "completeness_interest",
            "Which completeness are you interested in?",
            &[("general", "general"), ("patient-level", "patient_level"), ("record", "record")],
        )],
        leaves: &[
            L("general", &["completeness"], &[]),
            L("patient_level", &["patient_level_completeness"], &[]),
            L("record", &["record_completeness"], &[]),
        ],
    },
    Fixture {
        name: "syntactic_consistency",
        root: "syntactic_accuracy",
        questions: &[],
        leaves: &[L("syntactic_accuracy", &["syntactic_accuracy"], &[])],
    },
    Fixture {
        name: "homogeneity",
        root: "subclusters",
        questions: &[],
        leaves: &[L("subclusters", &[], &[(DIST, "Internal distribution as reference")])],
    },
    Fixture {
        name: "distribution_drift",
        root: "drift_focus",
        questions: &[Q(
            "drift_focus",
            "drift_focus",
            "Do you want to detect a change in signal or difference in distribution?",
            &[("signal", "page_hinkley"), ("distribution", "intervals")],
        )],
        leaves: &[
            L("page_hinkley", &["page_hinkley"], &[]),
            L("intervals", &[], &[(DIST, "Earlier time interval as reference")]),
        ],
    },
    Fixture {
        name: "dataset_size",
        root: "dataset_size",
        questions: &[],
        leaves: &[L("dataset_size", &["dataset_size"], &[])],
    },
    Fixture {
        name: "granularity",
        root: "modality",
        questions: &[Q(
            "modality",
            "modality",
            "Which data modalities are of interest?",
            &[
                ("tabular", "granularity"),
                ("image", "resolution"),
                ("image, time series", "sampling_frequency"),
                ("hierarchical", "label_granularity"),
            ],
        )],
        leaves: &[
            L("granularity", &["granularity"], &[]),
            L("resolution", &["resolution"], &[]),
            L("sampling_frequency", &["sampling_frequency"], &[]),
            L("label_granularity", &["label_granularity"], &[]),
        ],
    },
    Fixture {
        name: "variety",
        root: "target_population",
        questions: &[],
        leaves: &[L("target_population", &[], &[(DIST, "Target distribution as reference")])],
    },
    Fixture {
        name: "target_class_balance",
        root: "ml_task",
        questions: &[
            Q("ml_task", "ml_task", "What is the ML task?", &[("classification", "balance_focus"), ("regression", "regression")]),
            Q(
                "balance_focus",
                "balance_focus",
                "Where does the focus lie?",
                &[("general estimation", "imbalance_ratio"), ("distribution", "balance_approach")],
            ),
            Q(
                "balance_approach",
                "balance_approach",
                "Classical approach vs distribution agreement?",
                &[("classical approach", "classical"), ("distribution agreement", "agreement")],
            ),
        ],
        leaves: &[
            L("regression", &[], &[(DIST, "Target distribution as reference")]),
            L("imbalance_ratio", &["imbalance_ratio"], &[]),
            L("classical", &["imbalance_degree", "lrid"], &[]),
            L("agreement", &[], &[(DIST, "Target distribution as reference")]),
        ],
    },
    Fixture {
        name: "currency",
        root: "expiration_date",
        questions: &[
            Q(
                "expiration_date",
                "expiration_date",
                "Does the data have an expiration date?",
                &[("yes", "decay_shape"), ("no", "update_frequency_known")],
            ),
            Q("decay_shape", "decay_shape", "What kind of decay is expected?", &[("linear", "li"), ("polynomial", "ballou")]),
            Q(
                "update_frequency_known",
                "update_frequency_known",
                "Do you have information about the update frequency needed?",
                &[("yes", "hinrichs"), ("no", "heinrich")],
            ),
        ],
        leaves: &[
            L("li", &["currency_li"], &[]),
            L("ballou", &["currency_ballou"], &[]),
            L("hinrichs", &["currency_hinrichs"], &[]),
            L("heinrich", &["currency_heinrich"], &[]),
        ],
    },
    Fixture {
        name: "uniqueness",
        root: "identicality",
        questions: &[Q(
            "identicality",
            "identicality",
            "What type of identicality is of concern?",
            &[("fully identical", "duplicates"), ("logically identical", "ess")],
        )],
        leaves: &[
            L("duplicates", &["prevalence_of_duplicates"], &[]),
            L("ess", &["effective_sample_size"], &[]),
        ],
    },
    Fixture {
        name: "informative_missingness",
        root: "missingness_mechanism",
        questions: &[Q(
            "missingness_mechanism",
            "missingness_mechanism",
            "Which missingness mechanism shall be determined?",
            &[("MAR", "dropout"), ("MNAR", "dropout"), ("MCAR", "little")],
        )],
        leaves: &[L("dropout", &["informative_dropout"], &[]), L("little", &["littles_test"], &[])],
    },
    Fixture {
        name: "feature_importance",
        root: "features_vs_target",
        questions: &[],
        leaves: &[L("features_vs_target", &[], &[(CORR, "Feature against target")])],
    },
    Fixture {
        name: "distribution_metrics",
        root: "distribution_aspect",
        questions: &[
            Q(
                "distribution_aspect",
                "distribution_aspect",
                "Do you want to describe a single distribution or compare distributions?",
                &[("single distribution", "data_type_single"), ("comparison", "comparison_approach")],
            ),
            Q(
                "data_type_single",
                "data_type",
                "What is the data type?",
                &[("numerical", "spread"), ("ordinal", "ordinal_spread"), ("categorical", "diversity")],
            ),
            Q(
                "comparison_approach",
                "comparison_approach",
                "Which mathematical approach shall be used?",
                &[("distance", "embeddings"), ("divergence", "divergences"), ("statistical test", "data_type_test")],
            ),
            Q(
                "embeddings",
                "embeddings",
                "Are the data high-dimensional embeddings?",
                &[("yes", "embedding_distances"), ("no", "distances")],
            ),
            Q(
                "data_type_test",
                "data_type",
                "What is the data type?",
                &[("numerical", "numerical_tests"), ("ordinal", "ordinal_tests"), ("categorical", "categorical_tests")],
            ),
        ],
        leaves: &[
            L("spread", &["range", "interquartile_range", "mean_sd"], &[]),
            L("ordinal_spread", &["range", "interquartile_range"], &[]),
            L("diversity", &["hill_number"], &[]),
            L("embedding_distances", &["fid", "kid", "mmd"], &[]),
            L("distances", &["wasserstein", "energy_distance", "mmd", "cohens_d"], &[]),
            L("divergences", &["kl_divergence", "js_divergence", "psi"], &[]),
            L("numerical_tests", &["ks_test", "epps_singleton", "anderson_darling", "mann_whitney_u"], &[]),
            L("ordinal_tests", &["ks_test", "anderson_darling", "mann_whitney_u"], &[]),
            L("categorical_tests", &["chi_squared"], &[]),
        ],
    },
    Fixture {
        name: "correlation_coefficients",
        root: "data_type",
        questions: &[
            Q(
                "data_type",
                "data_type",
                "What is the data type?",
                &[("ordinal", "ordinal"), ("numerical", "repeated_measurement_count"), ("categorical", "categorical")],
            ),
            Q(
                "repeated_measurement_count",
                "repeated_measurement_count",
                "How many repeated measurements/labels exist?",
                &[("two", "two"), ("multiple", "multiple")],
            ),
        ],
        leaves: &[
            L("ordinal", &["kendall_tau", "spearman", "goodman_kruskal_gamma"], &[]),
            L("categorical", &["cramers_v"], &[]),
            L("two", &["concordance_cc", "pearson"], &[]),
            L("multiple", &["icc"], &[]),
        ],
    },
];

pub fn every_builtin_tree_matches_its_transcription() {
    assert_eq!(builtin_trees().len(), 16);
    assert_eq!(FIXTURES.len(), 16);
    for f in FIXTURES {
        let t = tree(f.name).unwrap();
        assert_eq!(t.root, f.root, "{}: root", f.name);
        let mut seen = 0;
        for q in f.questions {
            let Some(Node::Question(n)) = t.node(q.0) else { panic!("{}: question {} missing", f.name, q.0) };
            assert_eq!(n.key(), q.1, "{}: key of {}", f.name, q.0);
            assert_eq!(n.text, q.2, "{}: text of {}", f.name, q.0);
            let edges: Vec<(&str, &str)> = n.answers.iter().map(|(a, c)| (a.as_str(), c.as_str())).collect();
            assert_eq!(edges, q.3, "{}: answers of {}", f.name, q.0);
            seen += 1;
        }
        for l in f.leaves {
            let Some(Node::Leaf(n)) = t.node(l.0) else { panic!("{}: leaf {} missing", f.name, l.0) };
            assert_eq!(n.metrics, l.1, "{}: metrics of {}", f.name, l.0);
            let subs: Vec<(&str, &str)> =
                n.subtrees.iter().map(|s| (s.tree.tree_name(), s.context.as_deref().unwrap_or(""))).collect();
            assert_eq!(subs, l.2, "{}: subtrees of {}", f.name, l.0);
            seen += 1;
        }
        assert_eq!(seen, t.nodes.len() + t.leaves.len(), "{}: extra nodes", f.name);
    }
}

pub fn every_registry_metric_is_reachable() {
    let reachable: BTreeSet<&str> = FIXTURES.iter().flat_map(|f| f.leaves.iter().flat_map(|l| l.1.iter().copied())).collect();
    let ids: BTreeSet<&str> = all_cards().iter().map(|c| c.id.as_str()).collect();
    assert_eq!(reachable, ids);
}

fn ptbxl_profile() -> UseCaseProfile {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../profiles/ptbxl.json")).unwrap();
    UseCaseProfile::from_json(&text).unwrap()
}

pub fn ptbxl_profile_yields_sixteen_rows() {
    let sel = select_all(&ptbxl_profile(), Mode::Strict);
    assert!(sel.errors().is_empty(), "{:?}", sel.errors());
    let rows: Vec<(Dimension, String)> = sel.rows().into_iter().map(|r| (r.dimension, r.metric)).collect();
    use Dimension::*;
    let expected = [
        (Completeness, "completeness"),
        (Completeness, "completeness"),
        (Completeness, "patient_level_completeness"),
        (Accuracy, "entropy"),
        (Currency, "currency_heinrich"),
        (TargetClassBalance, "imbalance_ratio"),
        (Granularity, "granularity"),
        (Granularity, "sampling_frequency"),
        (DatasetSize, "dataset_size"),
        (Variety, "range"),
        (Variety, "mean_sd"),
        (Variety, "hill_number"),
        (Variety, "hill_number"),
        (FeatureImportance, "pearson"),
        (Uniqueness, "prevalence_of_duplicates"),
        (Homogeneity, "mmd"),
    ];
    let expected: Vec<(Dimension, String)> = expected.iter().map(|(d, m)| (*d, m.to_string())).collect();
    assert_eq!(rows, expected);
    assert_eq!(sel.metric_ids().len(), 14);

    let acc = sel.get(Accuracy).unwrap();
    assert_eq!(acc.metrics.iter().map(|m| m.id.as_str()).collect::<Vec<_>>(), ["entropy"]);
    let nl = sel.get(NoisyLabels).unwrap();
    assert!(nl.metrics.is_empty());
    assert_eq!(nl.reason.as_deref(), Some("multiple raters required"));
    let mmd = &sel.get(Homogeneity).unwrap().metrics[0];
    assert_eq!(mmd.context.as_deref(), Some("Internal distribution as reference"));
    assert!(!sel.get(InformativeMissingness).unwrap().relevant);
}

pub fn empty_profile_reports_each_first_question() {
    let sel = select_all(&UseCaseProfile::default(), Mode::Partial);
    for d in &sel.dimensions {
        assert!(d.error.is_none());
        let t = dq_core::selection::dimension_tree(d.dimension);
        match t.root_question() {
            Some(text) => assert_eq!(d.unanswered[0].text, text),
            None => {
                // subtree-only dimensions stop at the subtree's root question
                if d.subtrees.is_empty() {
                    assert!(d.unanswered.is_empty());
                } else {
                    assert!(!d.unanswered.is_empty());
                }
            }
        }
    }
    let strict = select_all(&UseCaseProfile::default(), Mode::Strict);
    let (_, msg) = strict.errors()[0];
    assert!(msg.contains("unanswered question"));
}
