use serde::{Deserialize, Serialize};

/// A computed value together with the caveats raised while computing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flagged<T> {
    pub value: T,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl<T> Flagged<T> {
    pub fn clean(value: T) -> Self {
        Flagged {
            value,
            warnings: Vec::new(),
        }
    }

    pub fn warn(value: T, warning: impl Into<String>) -> Self {
        Flagged {
            value,
            warnings: vec![warning.into()],
        }
    }
}
