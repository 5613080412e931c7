//! Decision-tree metric selection.

pub mod profile;
pub mod rationale;
pub mod traverse;
pub mod tree;

pub use profile::{Answer, UseCaseProfile};
pub use rationale::{rationale_document, RationaleDocument, LIBRARY_VERSION};
pub use traverse::{
    select_all, traverse, traverse_scoped, DimensionSelection, Mode, PlannedRow, SelectedMetric, SelectionResult,
    TraceStep, Traversal, Unanswered,
};
pub use tree::{
    builtin_trees, dimension_tree, tree, DecisionTree, LeafNode, Node, QuestionNode, Subtree, SubtreeRef,
    CORRELATION_TREE, DISTRIBUTION_TREE,
};
