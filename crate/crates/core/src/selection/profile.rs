use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{Error, Result};
use crate::registry::{Dimension, ParamMap};

/// One answer or several (several answers follow every matching branch).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Answer {
    One(String),
    Many(Vec<String>),
}

impl Answer {
    pub fn labels(&self) -> Vec<String> {
        match self {
            Answer::One(s) => vec![s.clone()],
            Answer::Many(v) => v.clone(),
        }
    }
}

/// Answers to decision-tree questions plus the user's evaluation choices.
///
/// Answer keys are question ids; a key `dimension.question` applies only
/// while traversing that dimension (including its subtrees) and takes
/// precedence over the plain key.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Json")]
pub struct UseCaseProfile {
    pub answers: IndexMap<String, Answer>,
    /// Dimensions judged relevant; all when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensions: Option<Vec<Dimension>>,
    /// Per-dimension subset of the selected metrics to keep.
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub pick: IndexMap<Dimension, Vec<String>>,
    /// Per-dimension, per-metric list of parameter sets; one report row each.
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub scopes: IndexMap<Dimension, IndexMap<String, Vec<ParamMap>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitoring_cadence: Option<String>,
}

#[derive(Deserialize)]
struct Structured {
    #[serde(default)]
    answers: IndexMap<String, Answer>,
    #[serde(default)]
    dimensions: Option<Vec<Dimension>>,
    #[serde(default)]
    pick: IndexMap<Dimension, Vec<String>>,
    #[serde(default)]
    scopes: IndexMap<Dimension, IndexMap<String, Vec<ParamMap>>>,
    #[serde(default)]
    monitoring_cadence: Option<String>,
}

impl TryFrom<Json> for UseCaseProfile {
    type Error = String;

    fn try_from(v: Json) -> std::result::Result<Self, String> {
        let Json::Object(map) = v else {
            return Err("profile must be a JSON object".into());
        };
        if map.contains_key("answers") {
            let s: Structured = serde_json::from_value(Json::Object(map)).map_err(|e| e.to_string())?;
            return Ok(UseCaseProfile {
                answers: s.answers,
                dimensions: s.dimensions,
                pick: s.pick,
                scopes: s.scopes,
                monitoring_cadence: s.monitoring_cadence,
            });
        }
        // bare map question-id → answer
        let answers = serde_json::from_value(Json::Object(map)).map_err(|e| e.to_string())?;
        Ok(UseCaseProfile { answers, ..Default::default() })
    }
}

impl UseCaseProfile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(Error::from)
    }

    pub fn with_answer(mut self, key: &str, answer: &str) -> Self {
        self.answers.insert(key.to_string(), Answer::One(answer.to_string()));
        self
    }

    /// Answer labels for `key` while traversing `dimension`.
    pub fn lookup(&self, dimension: &str, key: &str) -> Option<Vec<String>> {
        self.answers
            .get(&format!("{dimension}.{key}"))
            .or_else(|| self.answers.get(key))
            .map(Answer::labels)
    }

    pub fn is_relevant(&self, d: Dimension) -> bool {
        self.dimensions.as_ref().is_none_or(|v| v.contains(&d))
    }

    pub fn scopes_for(&self, d: Dimension, metric: &str) -> Vec<ParamMap> {
        self.scopes
            .get(&d)
            .and_then(|m| m.get(metric))
            .filter(|v| !v.is_empty())
            .cloned()
            .unwrap_or_else(|| vec![ParamMap::new()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_and_structured_forms() {
        let bare = UseCaseProfile::from_json(r#"{"ground_truth":"no","completeness_interest":["general","record"]}"#).unwrap();
        assert_eq!(bare.lookup("accuracy", "ground_truth"), Some(vec!["no".to_string()]));
        assert_eq!(bare.lookup("completeness", "completeness_interest").unwrap().len(), 2);
        let s = UseCaseProfile::from_json(
            r#"{"answers":{"data_type":"numerical","variety.data_type":"categorical"},"dimensions":["variety"]}"#,
        )
        .unwrap();
        assert_eq!(s.lookup("variety", "data_type"), Some(vec!["categorical".to_string()]));
        assert_eq!(s.lookup("homogeneity", "data_type"), Some(vec!["numerical".to_string()]));
        assert!(!s.is_relevant(Dimension::Accuracy));
        let back: UseCaseProfile = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
