#![allow(dead_code)]

use dq_core::data::{Column, ColumnSpec, Dataset, Role, VarType};
use dq_core::registry::{evaluate, params, MetricValue};
use dq_core::Error;
use serde_json::json;

fn categorical(name: &str, parts: &[(&str, usize)]) -> Column {
    let cells: Vec<Option<&str>> = parts.iter().flat_map(|(c, n)| std::iter::repeat_n(Some(*c), *n)).collect();
    Column::text(ColumnSpec::new(name, VarType::Categorical), cells)
}

fn scalar(v: &MetricValue) -> f64 {
    v.as_scalar().expect("scalar value")
}

pub fn hill_of_a_4000_1000_split() {
    let ds = Dataset::new(vec![categorical("sex", &[("male", 4000), ("female", 1000)])], None).unwrap();
    let r = evaluate("hill_number", &ds, &params(json!({"column": "sex"}))).unwrap();
    // 1 / (0.8² + 0.2²)
    let oracle = 1.0 / (0.8f64.powi(2) + 0.2f64.powi(2));
    assert!((scalar(&r.value) - oracle).abs() < 1e-12);
    assert!((scalar(&r.value) - 1.47).abs() < 0.005);
    assert_eq!(r.params["q"], json!(2.0));
}

pub fn hill_of_a_balanced_binary_column() {
    let ds = Dataset::new(vec![categorical("sex", &[("male", 2500), ("female", 2500)])], None).unwrap();
    let r = evaluate("hill_number", &ds, &params(json!({"column": "sex"}))).unwrap();
    assert!((scalar(&r.value) - 2.0).abs() < 1e-12);
}

pub fn heinrich_currency_after_32_4_years() {
    let age = (32.4 * 365.25 * 86_400.0) as i64;
    let now = 2_000_000_000i64;
    let ts = Column::new(
        ColumnSpec::new("recorded", VarType::Datetime).with_role(Role::Timestamp),
        vec![Some(dq_core::data::Value::Time(now - age))],
    );
    let ds = Dataset::new(vec![ts], None).unwrap();
    let r = evaluate("currency_heinrich", &ds, &params(json!({"evaluation_time": now}))).unwrap();
    let v = scalar(r.value.get("mean").unwrap());
    assert!((v - (-1e-9 * age as f64).exp()).abs() < 1e-12);
    assert!((v - 0.36).abs() < 0.01, "{v}");
    assert_eq!(r.params["decline"], json!(1e-9));
}

pub fn imbalance_ratio_of_250_vs_4750() {
    let label = categorical("label", &[("norm", 250), ("other", 4750)]);
    let ds = Dataset::new(vec![label], None).unwrap();
    let r = evaluate("imbalance_ratio", &ds, &params(json!({"column": "label"}))).unwrap();
    assert_eq!(scalar(&r.value), 19.0);
}

pub fn completeness_runs_on_any_table() {
    let a = Column::numeric(ColumnSpec::new("a", VarType::Numerical), vec![Some(1.0), None, Some(3.0), None]);
    let b = categorical("b", &[("x", 4)]);
    let ds = Dataset::new(vec![a, b], None).unwrap();
    let r = evaluate("completeness", &ds, &params(json!({}))).unwrap();
    assert_eq!(scalar(&r.value), 6.0 / 8.0);
    let empty = Dataset::new(vec![], None).unwrap();
    let r = evaluate("completeness", &empty, &params(json!({}))).unwrap();
    assert_eq!(scalar(&r.value), 1.0);
    assert!(!r.warnings.is_empty());
}

pub fn kappa_needs_two_raters() {
    let spec = ColumnSpec::new("rater_1", VarType::Categorical).with_role(Role::Annotation);
    let ds = Dataset::new(vec![Column::text(spec, vec![Some("a"), Some("b")])], None).unwrap();
    match evaluate("cohens_kappa", &ds, &params(json!({}))) {
        Err(Error::Prerequisite { reason, .. }) => assert!(reason.contains("multiple raters required")),
        other => panic!("{other:?}"),
    }
}

pub fn numerical_metric_rejects_categorical_column() {
    let ds = Dataset::new(vec![categorical("sex", &[("m", 3), ("f", 2)])], None).unwrap();
    assert!(matches!(
        evaluate("mean_sd", &ds, &params(json!({"column": "sex"}))),
        Err(Error::NotApplicable { .. }) | Err(Error::ColumnType { .. })
    ));
}
