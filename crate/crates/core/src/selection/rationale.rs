use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::profile::UseCaseProfile;
use super::traverse::{SelectionResult, TraceStep};

pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance record of a metric selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationaleDocument {
    pub library_version: String,
    pub created: String,
    pub profile: UseCaseProfile,
    /// Every (question, answer) consumed, in traversal order.
    pub decisions: Vec<TraceStep>,
    pub selection: SelectionResult,
    pub parameters: BTreeMap<String, Json>,
    #[serde(default)]
    pub thresholds: BTreeMap<String, Json>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitoring_cadence: Option<String>,
}

pub fn rationale_document(
    sel: &SelectionResult,
    profile: &UseCaseProfile,
    params: BTreeMap<String, Json>,
) -> RationaleDocument {
    RationaleDocument {
        library_version: LIBRARY_VERSION.to_string(),
        created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        profile: profile.clone(),
        decisions: sel.dimensions.iter().flat_map(|d| d.trace.iter().cloned()).collect(),
        selection: sel.clone(),
        parameters: params,
        thresholds: BTreeMap::new(),
        monitoring_cadence: profile.monitoring_cadence.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::{select_all, Mode};

    #[test]
    fn round_trip_and_decisions() {
        let prof = UseCaseProfile::default().with_answer("ground_truth", "no").with_answer("blank_sample", "no");
        let sel = select_all(&prof, Mode::Partial);
        let doc = rationale_document(&sel, &prof, BTreeMap::new());
        let back: RationaleDocument = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(back, doc);
        assert!(doc.decisions.iter().any(|s| s.question == "blank_sample" && s.answer == "no"));
        let mut again = rationale_document(&sel, &prof, BTreeMap::new());
        again.created = doc.created.clone();
        assert_eq!(again, doc);
    }
}
