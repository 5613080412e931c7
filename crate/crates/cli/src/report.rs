use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{Context, Result};
use dq_core::registry::{card, evaluate, Cluster, Dimension, MetricValue, ParamMap, Scope, ScopeTarget};
use dq_core::selection::{RationaleDocument, UseCaseProfile, LIBRARY_VERSION};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::descriptor::LoadedDataset;

/// User parameter file for `evaluate`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamOverrides {
    /// Metric id → parameters merged over every row of that metric.
    #[serde(default)]
    pub metrics: BTreeMap<String, ParamMap>,
    /// Metrics computed in addition to the selection.
    #[serde(default)]
    pub extra: Vec<ExtraMetric>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraMetric {
    pub metric: String,
    #[serde(default)]
    pub dimension: Option<Dimension>,
    #[serde(default)]
    pub params: ParamMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub metric_id: String,
    pub dimension: Option<Dimension>,
    pub scope: Scope,
    pub params: BTreeMap<String, Json>,
    pub value: MetricValue,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub manual_extra: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub library_version: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub dataset_id: String,
    pub profile: UseCaseProfile,
    pub selection: RationaleDocument,
    pub results: Vec<ResultRow>,
    pub environment: Environment,
}

struct Job {
    metric: String,
    dimension: Option<Dimension>,
    context: Option<String>,
    params: ParamMap,
    extra: bool,
}

/// Parameters the descriptor and the run supply to every metric.
fn base_params(ds: &LoadedDataset, metric: &str, params: &ParamMap, seed: u64) -> ParamMap {
    let mut p = ParamMap::new();
    p.insert("seed".into(), seed.into());
    if let Some(t) = ds.evaluation_time {
        p.insert("evaluation_time".into(), t.into());
    }
    if metric == "syntactic_accuracy" {
        let col = params.get("column").and_then(Json::as_str);
        if let Some(words) = col.and_then(|c| ds.dictionaries.get(c)) {
            p.insert("dictionary".into(), words.clone().into());
        }
    }
    p
}

fn run(ds: &LoadedDataset, job: &Job, seed: u64) -> ResultRow {
    let mut params = base_params(ds, &job.metric, &job.params, seed);
    params.extend(job.params.clone());
    match evaluate(&job.metric, &ds.data, &params) {
        Ok(r) => {
            let mut scope = r.scope;
            scope.context = job.context.clone();
            ResultRow {
                metric_id: r.metric_id,
                dimension: job.dimension,
                scope,
                params: r.params,
                value: r.value,
                warnings: r.warnings,
                error: None,
                manual_extra: job.extra,
            }
        }
        Err(e) => ResultRow {
            metric_id: job.metric.clone(),
            dimension: job.dimension,
            scope: Scope { target: ScopeTarget::Global, context: job.context.clone() },
            params: job.params.clone().into_iter().collect(),
            value: MetricValue::Unavailable(()),
            warnings: Vec::new(),
            error: Some(e.to_string()),
            manual_extra: job.extra,
        },
    }
}

/// Compute every planned row of `selection` on `ds`. Failures are recorded
/// in the row; rows keep the selection's order.
pub fn build_report(ds: &LoadedDataset, selection: &RationaleDocument, overrides: &ParamOverrides, seed: u64) -> Report {
    let mut jobs: Vec<Job> = selection
        .selection
        .rows()
        .into_iter()
        .map(|r| {
            let mut params = r.params;
            if let Some(o) = overrides.metrics.get(&r.metric) {
                params.extend(o.clone());
            }
            Job { metric: r.metric, dimension: Some(r.dimension), context: r.context, params, extra: false }
        })
        .collect();
    jobs.extend(overrides.extra.iter().map(|e| Job {
        metric: e.metric.clone(),
        dimension: e.dimension,
        context: None,
        params: e.params.clone(),
        extra: true,
    }));
    let results: Vec<ResultRow> = jobs.par_iter().map(|j| run(ds, j, seed)).collect();
    let mut doc = selection.clone();
    if !overrides.metrics.is_empty() || !overrides.extra.is_empty() {
        doc.parameters.insert("overrides".into(), serde_json::to_value(overrides).expect("serializable"));
    }
    Report {
        dataset_id: ds.id.clone(),
        profile: selection.profile.clone(),
        selection: doc,
        results,
        environment: Environment { library_version: LIBRARY_VERSION.to_string(), seed },
    }
}

/// Compute `metrics` with their default parameters.
pub fn evaluate_ids(ds: &LoadedDataset, metrics: &[String], overrides: &ParamOverrides, seed: u64) -> Vec<ResultRow> {
    let jobs: Vec<Job> = metrics
        .iter()
        .map(|m| Job {
            metric: m.clone(),
            dimension: card(m).ok().and_then(|c| c.dimensions.first().copied()),
            context: None,
            params: overrides.metrics.get(m).cloned().unwrap_or_default(),
            extra: false,
        })
        .collect();
    jobs.par_iter().map(|j| run(ds, j, seed)).collect()
}

pub fn scope_label(s: &Scope) -> String {
    match &s.target {
        ScopeTarget::Columns { names } if names.len() > 3 => format!("{} columns", names.len()),
        _ => s.label(),
    }
}

/// Row heading such as "Hill number (sex)".
pub fn metric_label(r: &ResultRow) -> String {
    let name = card(&r.metric_id).map(|c| c.name.clone()).unwrap_or_else(|_| r.metric_id.clone());
    if r.error.is_some() {
        return name;
    }
    format!("{name} ({})", scope_label(&r.scope))
}

pub fn cell(r: &ResultRow) -> String {
    match &r.error {
        Some(_) => "error".into(),
        None => r.value.display_rounded(),
    }
}

/// Cluster- and dimension-grouped Markdown table with one value column per
/// report. Reports must share the same row layout.
pub fn markdown_grid(title: &str, reports: &[&Report]) -> String {
    let first = reports[0];
    let mut out = String::new();
    let _ = writeln!(out, "# {title}\n");
    let _ = write!(out, "| Cluster and dimension | Metric |");
    for r in reports {
        let _ = write!(out, " {} |", r.dataset_id);
    }
    let _ = write!(out, "\n|---|---|");
    for _ in reports {
        out.push_str("---|");
    }
    out.push('\n');
    let dash = " - |".repeat(reports.len());
    let mut cluster: Option<Cluster> = None;
    let mut emitted_dim: Option<Dimension> = None;
    let heading = |out: &mut String, d: Dimension, cluster: &mut Option<Cluster>| {
        if *cluster != Some(d.cluster()) {
            *cluster = Some(d.cluster());
            let _ = writeln!(out, "| **{}** | |{}", d.cluster().title(), " |".repeat(reports.len()));
        }
    };
    for d in Dimension::report_order() {
        let rows: Vec<usize> = (0..first.results.len())
            .filter(|&i| first.results[i].dimension == Some(d) && !first.results[i].manual_extra)
            .collect();
        let sel = first.selection.selection.get(d);
        if rows.is_empty() {
            if sel.is_some_and(|s| s.relevant) {
                heading(&mut out, d, &mut cluster);
                let _ = writeln!(out, "| {} | - |{dash}", d.title());
            }
            continue;
        }
        heading(&mut out, d, &mut cluster);
        for i in rows {
            let label = if emitted_dim == Some(d) { String::new() } else { d.title() };
            emitted_dim = Some(d);
            let _ = write!(out, "| {label} | {} |", metric_label(&first.results[i]));
            for r in reports {
                let _ = write!(out, " {} |", r.results.get(i).map(cell).unwrap_or_else(|| "-".into()));
            }
            out.push('\n');
        }
    }
    let extras: Vec<usize> = (0..first.results.len()).filter(|&i| first.results[i].manual_extra).collect();
    if !extras.is_empty() {
        let _ = writeln!(out, "| **Manual extras** | |{}", " |".repeat(reports.len()));
        for i in extras {
            let _ = write!(out, "| | {} |", metric_label(&first.results[i]));
            for r in reports {
                let _ = write!(out, " {} |", r.results.get(i).map(cell).unwrap_or_else(|| "-".into()));
            }
            out.push('\n');
        }
    }
    let mut notes = String::new();
    for r in reports {
        for row in &r.results {
            if let Some(e) = &row.error {
                let _ = writeln!(notes, "- {} / {}: error: {e}", r.dataset_id, row.metric_id);
            }
            for w in &row.warnings {
                let _ = writeln!(notes, "- {} / {} ({}): {w}", r.dataset_id, row.metric_id, scope_label(&row.scope));
            }
        }
    }
    for s in &first.selection.selection.dimensions {
        if let Some(reason) = &s.reason {
            if s.relevant {
                let _ = writeln!(notes, "- {}: {reason}", s.dimension.title());
            }
        }
    }
    if !notes.is_empty() {
        let _ = write!(out, "\n## Notes\n\n{notes}");
    }
    out
}

pub fn markdown(report: &Report) -> String {
    markdown_grid(&format!("Data quality report: {}", report.dataset_id), &[report])
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
