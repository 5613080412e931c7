use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Variable type of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarType {
    Numerical,
    Categorical,
    Ordinal,
    Datetime,
    Identifier,
}

impl fmt::Display for VarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VarType::Numerical => "numerical",
            VarType::Categorical => "categorical",
            VarType::Ordinal => "ordinal",
            VarType::Datetime => "datetime",
            VarType::Identifier => "identifier",
        };
        f.write_str(s)
    }
}

/// Role a column plays in the use case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Feature,
    Target,
    PatientId,
    Timestamp,
    Annotation,
    Weight,
}

impl Role {
    /// Roles that may be assigned to at most one column.
    pub fn is_unique(self) -> bool {
        matches!(self, Role::Target | Role::PatientId | Role::Timestamp)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::Feature => "feature",
            Role::Target => "target",
            Role::PatientId => "patient_id",
            Role::Timestamp => "timestamp",
            Role::Annotation => "annotation",
            Role::Weight => "weight",
        };
        f.write_str(s)
    }
}

fn default_role() -> Role {
    Role::Feature
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub vtype: VarType,
    #[serde(default = "default_role")]
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordinal_order: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub missing_tokens: BTreeSet<String>,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, vtype: VarType) -> Self {
        ColumnSpec {
            name: name.into(),
            vtype,
            role: Role::Feature,
            ordinal_order: None,
            missing_tokens: BTreeSet::new(),
        }
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn with_order<I, S>(mut self, order: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.ordinal_order = Some(order.into_iter().map(Into::into).collect());
        self
    }

    pub fn with_missing_tokens<I, S>(mut self, tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.missing_tokens = tokens.into_iter().map(Into::into).collect();
        self
    }

    /// Whether a raw text token denotes a missing value for this column.
    /// Empty strings are always missing.
    pub fn is_missing_token(&self, raw: &str) -> bool {
        let t = raw.trim();
        t.is_empty() || self.missing_tokens.contains(t)
    }
}
