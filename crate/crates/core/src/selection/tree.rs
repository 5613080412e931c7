use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::{card, Dimension};

pub const DISTRIBUTION_TREE: &str = "distribution_metrics";
pub const CORRELATION_TREE: &str = "correlation_coefficients";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subtree {
    DistributionMetrics,
    CorrelationCoefficients,
}

impl Subtree {
    pub fn tree_name(self) -> &'static str {
        match self {
            Subtree::DistributionMetrics => DISTRIBUTION_TREE,
            Subtree::CorrelationCoefficients => CORRELATION_TREE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtreeRef {
    pub tree: Subtree,
    #[serde(default)]
    pub context: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionNode {
    pub id: String,
    /// Profile key; defaults to the node id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
    pub text: String,
    /// Answer label → child id, left to right.
    pub answers: IndexMap<String, String>,
}

impl QuestionNode {
    pub fn key(&self) -> &str {
        self.question.as_deref().unwrap_or(&self.id)
    }

    pub fn options(&self) -> Vec<String> {
        self.answers.keys().cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafNode {
    pub id: String,
    #[serde(default)]
    pub metrics: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subtrees: Vec<SubtreeRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node<'a> {
    Question(&'a QuestionNode),
    Leaf(&'a LeafNode),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Dimension name, or one of the two shared subtree names.
    pub dimension: String,
    pub title: String,
    pub root: String,
    #[serde(default)]
    pub nodes: Vec<QuestionNode>,
    pub leaves: Vec<LeafNode>,
}

impl DecisionTree {
    pub fn name(&self) -> &str {
        &self.dimension
    }

    pub fn node(&self, id: &str) -> Option<Node<'_>> {
        self.nodes
            .iter()
            .find(|n| n.id == id)
            .map(Node::Question)
            .or_else(|| self.leaves.iter().find(|l| l.id == id).map(Node::Leaf))
    }

    pub fn root_node(&self) -> Node<'_> {
        self.node(&self.root).expect("validated tree has a root")
    }

    /// Root question text, if the tree asks anything.
    pub fn root_question(&self) -> Option<&str> {
        match self.root_node() {
            Node::Question(q) => Some(&q.text),
            Node::Leaf(_) => None,
        }
    }

    /// All (question key, answer label, child id) edges in document order.
    pub fn edges(&self) -> Vec<(String, String, String)> {
        self.nodes
            .iter()
            .flat_map(|n| n.answers.iter().map(move |(a, c)| (n.key().to_string(), a.clone(), c.clone())))
            .collect()
    }

    /// Metrics of every leaf below `id`, left to right, deduplicated.
    pub fn metrics_below(&self, id: &str) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_below(id, &mut out);
        out
    }

    fn collect_below(&self, id: &str, out: &mut Vec<String>) {
        match self.node(id) {
            Some(Node::Question(q)) => {
                for child in q.answers.values() {
                    self.collect_below(child, out);
                }
            }
            Some(Node::Leaf(l)) => {
                for m in &l.metrics {
                    if !out.contains(m) {
                        out.push(m.clone());
                    }
                }
            }
            None => {}
        }
    }

    pub fn parse(json: &str) -> Result<Self> {
        let t: DecisionTree = serde_json::from_str(json)?;
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::MalformedTree { tree: self.dimension.clone(), reason };
        let is_subtree = self.dimension == DISTRIBUTION_TREE || self.dimension == CORRELATION_TREE;
        if !is_subtree && self.dimension.parse::<Dimension>().is_err() {
            return Err(bad(format!("unknown dimension `{}`", self.dimension)));
        }
        let mut ids = BTreeSet::new();
        for id in self.nodes.iter().map(|n| &n.id).chain(self.leaves.iter().map(|l| &l.id)) {
            if !ids.insert(id.as_str()) {
                return Err(bad(format!("duplicate node id `{id}`")));
            }
        }
        if !ids.contains(self.root.as_str()) {
            return Err(bad(format!("root `{}` does not exist", self.root)));
        }
        for n in &self.nodes {
            if n.answers.is_empty() {
                return Err(bad(format!("question `{}` has no answers", n.id)));
            }
            for (a, c) in &n.answers {
                if !ids.contains(c.as_str()) {
                    return Err(bad(format!("answer `{a}` of `{}` leads to missing node `{c}`", n.id)));
                }
            }
        }
        for l in &self.leaves {
            for m in &l.metrics {
                let c = card(m).map_err(|_| bad(format!("leaf `{}` names unknown metric `{m}`", l.id)))?;
                if &c.id != m {
                    return Err(bad(format!("leaf `{}` uses alias `{m}` instead of `{}`", l.id, c.id)));
                }
            }
            if is_subtree && !l.subtrees.is_empty() {
                return Err(bad("shared subtrees cannot nest".into()));
            }
        }
        // every node reachable from the root exactly along tree edges, no cycles
        let mut depth: HashMap<&str, usize> = HashMap::new();
        let mut stack = vec![(self.root.as_str(), 0usize, vec![self.root.as_str()])];
        while let Some((id, d, path)) = stack.pop() {
            depth.insert(id, d);
            if let Some(Node::Question(q)) = self.node(id) {
                for c in q.answers.values() {
                    if path.contains(&c.as_str()) {
                        return Err(bad(format!("cycle through `{c}`")));
                    }
                    let mut p = path.clone();
                    p.push(c);
                    stack.push((c, d + 1, p));
                }
            }
        }
        if let Some(orphan) = ids.iter().find(|i| !depth.contains_key(*i)) {
            return Err(bad(format!("node `{orphan}` is unreachable")));
        }
        Ok(())
    }
}

const TREE_SOURCES: [&str; 16] = [
    include_str!("../../data/trees/accuracy.json"),
    include_str!("../../data/trees/noisy_labels.json"),
    include_str!("../../data/trees/completeness.json"),
    include_str!("../../data/trees/syntactic_consistency.json"),
    include_str!("../../data/trees/homogeneity.json"),
    include_str!("../../data/trees/distribution_drift.json"),
    include_str!("../../data/trees/dataset_size.json"),
    include_str!("../../data/trees/granularity.json"),
    include_str!("../../data/trees/variety.json"),
    include_str!("../../data/trees/target_class_balance.json"),
    include_str!("../../data/trees/currency.json"),
    include_str!("../../data/trees/uniqueness.json"),
    include_str!("../../data/trees/informative_missingness.json"),
    include_str!("../../data/trees/feature_importance.json"),
    include_str!("../../data/trees/distribution_metrics.json"),
    include_str!("../../data/trees/correlation_coefficients.json"),
];

/// The 14 dimension trees followed by the two shared subtrees.
pub fn builtin_trees() -> &'static [DecisionTree] {
    static TREES: OnceLock<Vec<DecisionTree>> = OnceLock::new();
    TREES.get_or_init(|| {
        TREE_SOURCES
            .iter()
            .map(|s| DecisionTree::parse(s).expect("built-in tree is well formed"))
            .collect()
    })
}

pub fn tree(name: &str) -> Result<&'static DecisionTree> {
    builtin_trees()
        .iter()
        .find(|t| t.dimension == name)
        .ok_or_else(|| Error::UnknownValue { kind: "decision tree", value: name.to_string() })
}

pub fn dimension_tree(d: Dimension) -> &'static DecisionTree {
    tree(d.as_str()).expect("every dimension has a tree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_valid_trees() {
        assert_eq!(builtin_trees().len(), 16);
        for d in Dimension::ALL {
            assert_eq!(dimension_tree(*d).dimension, d.as_str());
        }
    }

    #[test]
    fn malformed_trees_rejected() {
        let dangling = r#"{"dimension":"currency","title":"x","root":"q","nodes":[{"id":"q","text":"?","answers":{"a":"nowhere"}}],"leaves":[]}"#;
        assert!(DecisionTree::parse(dangling).is_err());
        let unknown = r#"{"dimension":"currency","title":"x","root":"l","leaves":[{"id":"l","metrics":["bogus"]}]}"#;
        assert!(DecisionTree::parse(unknown).is_err());
        let orphan = r#"{"dimension":"currency","title":"x","root":"l","leaves":[{"id":"l","metrics":[]},{"id":"m","metrics":[]}]}"#;
        assert!(DecisionTree::parse(orphan).is_err());
    }
}
