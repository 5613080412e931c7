use serde::{Deserialize, Serialize};

use super::profile::UseCaseProfile;
use super::tree::{dimension_tree, tree, DecisionTree, Node, SubtreeRef};
use crate::error::{Error, Result};
use crate::registry::{Dimension, ParamMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Strict,
    #[default]
    Partial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub tree: String,
    pub question: String,
    pub text: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unanswered {
    pub tree: String,
    pub question: String,
    pub text: String,
    pub options: Vec<String>,
}

/// Outcome of walking one tree.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Traversal {
    pub tree: String,
    pub trace: Vec<TraceStep>,
    pub metrics: Vec<String>,
    /// Metrics below an unanswered question (partial mode only).
    pub recommended: Vec<String>,
    pub subtrees: Vec<SubtreeRef>,
    pub unanswered: Vec<Unanswered>,
    pub notes: Vec<String>,
}

fn push_unique<T: PartialEq + Clone>(v: &mut Vec<T>, items: &[T]) {
    for i in items {
        if !v.contains(i) {
            v.push(i.clone());
        }
    }
}

/// Walk `t` with the answers in `profile`, reading scoped answers for
/// `scope` (the dimension being evaluated).
pub fn traverse_scoped(t: &DecisionTree, profile: &UseCaseProfile, mode: Mode, scope: &str) -> Result<Traversal> {
    let mut out = Traversal { tree: t.dimension.clone(), ..Default::default() };
    walk(t, &t.root, profile, mode, scope, &mut out)?;
    Ok(out)
}

pub fn traverse(t: &DecisionTree, profile: &UseCaseProfile, mode: Mode) -> Result<Traversal> {
    traverse_scoped(t, profile, mode, &t.dimension)
}

fn walk(t: &DecisionTree, id: &str, profile: &UseCaseProfile, mode: Mode, scope: &str, out: &mut Traversal) -> Result<()> {
    match t.node(id).expect("validated tree") {
        Node::Leaf(l) => {
            push_unique(&mut out.metrics, &l.metrics);
            push_unique(&mut out.subtrees, &l.subtrees);
            if let Some(n) = &l.note {
                push_unique(&mut out.notes, std::slice::from_ref(n));
            }
            Ok(())
        }
        Node::Question(q) => {
            let Some(labels) = profile.lookup(scope, q.key()) else {
                if mode == Mode::Strict {
                    return Err(Error::Unanswered {
                        tree: t.dimension.clone(),
                        question: q.key().to_string(),
                        text: q.text.clone(),
                    });
                }
                out.unanswered.push(Unanswered {
                    tree: t.dimension.clone(),
                    question: q.key().to_string(),
                    text: q.text.clone(),
                    options: q.options(),
                });
                push_unique(&mut out.recommended, &t.metrics_below(id));
                return Ok(());
            };
            if let Some(bad) = labels.iter().find(|a| !q.answers.contains_key(*a)) {
                return Err(Error::InvalidAnswer {
                    question: q.key().to_string(),
                    answer: bad.clone(),
                    valid: q.options(),
                });
            }
            let mut visited: Vec<&str> = Vec::new();
            for (answer, child) in &q.answers {
                if !labels.contains(answer) {
                    continue;
                }
                out.trace.push(TraceStep {
                    tree: t.dimension.clone(),
                    question: q.key().to_string(),
                    text: q.text.clone(),
                    answer: answer.clone(),
                });
                if !visited.contains(&child.as_str()) {
                    visited.push(child);
                    walk(t, child, profile, mode, scope, out)?;
                }
            }
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedMetric {
    pub id: String,
    /// Tree whose leaf produced the metric.
    pub via: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    /// One parameter set per evaluation row.
    pub scopes: Vec<ParamMap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSelection {
    pub dimension: Dimension,
    pub relevant: bool,
    pub metrics: Vec<SelectedMetric>,
    pub recommended: Vec<String>,
    pub trace: Vec<TraceStep>,
    pub subtrees: Vec<SubtreeRef>,
    pub unanswered: Vec<Unanswered>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub mode: Mode,
    pub dimensions: Vec<DimensionSelection>,
}

/// One planned metric computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedRow {
    pub dimension: Dimension,
    pub metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    pub params: ParamMap,
}

impl SelectionResult {
    pub fn get(&self, d: Dimension) -> Option<&DimensionSelection> {
        self.dimensions.iter().find(|s| s.dimension == d)
    }

    /// Distinct selected metric ids in selection order.
    pub fn metric_ids(&self) -> Vec<String> {
        let mut v = Vec::new();
        for s in &self.dimensions {
            push_unique(&mut v, &s.metrics.iter().map(|m| m.id.clone()).collect::<Vec<_>>());
        }
        v
    }

    /// Evaluation rows: one per selected metric and scope.
    pub fn rows(&self) -> Vec<PlannedRow> {
        let mut rows = Vec::new();
        for d in Dimension::report_order() {
            let Some(s) = self.get(d) else { continue };
            for m in &s.metrics {
                for p in &m.scopes {
                    rows.push(PlannedRow { dimension: d, metric: m.id.clone(), context: m.context.clone(), params: p.clone() });
                }
            }
        }
        rows
    }

    pub fn errors(&self) -> Vec<(Dimension, &str)> {
        self.dimensions.iter().filter_map(|s| Some((s.dimension, s.error.as_deref()?))).collect()
    }
}

fn select_dimension(d: Dimension, profile: &UseCaseProfile, mode: Mode) -> Result<DimensionSelection> {
    let main = traverse(dimension_tree(d), profile, mode)?;
    let mut metrics: Vec<SelectedMetric> = main
        .metrics
        .iter()
        .map(|m| SelectedMetric { id: m.clone(), via: main.tree.clone(), context: None, scopes: Vec::new() })
        .collect();
    let mut trace = main.trace;
    let mut recommended = main.recommended;
    let mut unanswered = main.unanswered;
    let mut notes = main.notes;
    for r in &main.subtrees {
        let sub = traverse_scoped(tree(r.tree.tree_name())?, profile, mode, d.as_str())?;
        for m in sub.metrics {
            if !metrics.iter().any(|x| x.id == m) {
                metrics.push(SelectedMetric { id: m, via: sub.tree.clone(), context: r.context.clone(), scopes: Vec::new() });
            }
        }
        trace.extend(sub.trace);
        push_unique(&mut recommended, &sub.recommended);
        unanswered.extend(sub.unanswered);
        push_unique(&mut notes, &sub.notes);
    }
    if let Some(keep) = profile.pick.get(&d) {
        for k in keep.iter().filter(|k| !metrics.iter().any(|m| &m.id == *k)) {
            notes.push(format!("picked metric `{k}` is not reachable with these answers"));
        }
        metrics.retain(|m| keep.contains(&m.id));
    }
    for m in &mut metrics {
        m.scopes = profile.scopes_for(d, &m.id);
    }
    let reason = if metrics.is_empty() && !notes.is_empty() { Some(notes.join("; ")) } else { None };
    Ok(DimensionSelection {
        dimension: d,
        relevant: true,
        metrics,
        recommended,
        trace,
        subtrees: main.subtrees,
        unanswered,
        reason,
        error: None,
    })
}

/// Walk every dimension tree, expanding shared subtrees. Failures are
/// recorded per dimension.
pub fn select_all(profile: &UseCaseProfile, mode: Mode) -> SelectionResult {
    let dimensions = Dimension::report_order()
        .into_iter()
        .map(|d| {
            if !profile.is_relevant(d) {
                return DimensionSelection {
                    dimension: d,
                    relevant: false,
                    metrics: Vec::new(),
                    recommended: Vec::new(),
                    trace: Vec::new(),
                    subtrees: Vec::new(),
                    unanswered: Vec::new(),
                    reason: Some("dimension not selected as relevant".into()),
                    error: None,
                };
            }
            select_dimension(d, profile, mode).unwrap_or_else(|e| DimensionSelection {
                dimension: d,
                relevant: true,
                metrics: Vec::new(),
                recommended: Vec::new(),
                trace: Vec::new(),
                subtrees: Vec::new(),
                unanswered: Vec::new(),
                reason: None,
                error: Some(e.to_string()),
            })
        })
        .collect();
    SelectionResult { mode, dimensions }
}
