use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! string_enum {
    ($(#[$m:meta])* $name:ident, $kind:literal { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str() == norm)
                    .ok_or_else(|| Error::UnknownValue { kind: $kind, value: s.to_string() })
            }
        }
    };
}

string_enum!(
    /// The quantitative data-quality dimensions.
    Dimension, "dimension" {
        Accuracy => "accuracy",
        NoisyLabels => "noisy_labels",
        Completeness => "completeness",
        SyntacticConsistency => "syntactic_consistency",
        Homogeneity => "homogeneity",
        DistributionDrift => "distribution_drift",
        DatasetSize => "dataset_size",
        Granularity => "granularity",
        Variety => "variety",
        TargetClassBalance => "target_class_balance",
        Currency => "currency",
        Uniqueness => "uniqueness",
        InformativeMissingness => "informative_missingness",
        FeatureImportance => "feature_importance",
    }
);

string_enum!(
    /// The seven disjoint metric groups.
    Group, "group" {
        MeasurementProcess => "measurement_process",
        Consistency => "consistency",
        Representativeness => "representativeness",
        Timeliness => "timeliness",
        Informativeness => "informativeness",
        DistributionMetrics => "distribution_metrics",
        CorrelationCoefficients => "correlation_coefficients",
    }
);

string_enum!(
    Modality, "modality" {
        Tabular => "tabular",
        Image => "image",
        TimeSeries => "time_series",
        Text => "text",
        Multimodal => "multimodal",
    }
);

string_enum!(
    CardVarType, "variable type" {
        Numerical => "numerical",
        Categorical => "categorical",
        Ordinal => "ordinal",
    }
);

string_enum!(
    PitfallTag, "pitfall" {
        ParameterChoice => "parameter_choice",
        OutlierSensitivity => "outlier_sensitivity",
        MissingValueSensitivity => "missing_value_sensitivity",
        SmallSampleInstability => "small_sample_instability",
        ImbalanceInstability => "imbalance_instability",
    }
);

/// Cluster a dimension belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cluster {
    MeasurementProcess,
    Timeliness,
    Representativeness,
    Informativeness,
    Consistency,
}

impl Cluster {
    pub fn title(self) -> &'static str {
        match self {
            Cluster::MeasurementProcess => "Measurement process",
            Cluster::Timeliness => "Timeliness",
            Cluster::Representativeness => "Representativeness",
            Cluster::Informativeness => "Informativeness",
            Cluster::Consistency => "Consistency",
        }
    }
}

impl Dimension {
    pub fn cluster(self) -> Cluster {
        use Dimension::*;
        match self {
            Accuracy | NoisyLabels | Completeness => Cluster::MeasurementProcess,
            SyntacticConsistency | Homogeneity | DistributionDrift => Cluster::Consistency,
            DatasetSize | Granularity | Variety | TargetClassBalance => Cluster::Representativeness,
            Currency => Cluster::Timeliness,
            Uniqueness | InformativeMissingness | FeatureImportance => Cluster::Informativeness,
        }
    }

    pub fn title(self) -> String {
        let s = self.as_str().replace('_', " ");
        let mut c = s.chars();
        match c.next() {
            Some(f) => f.to_uppercase().chain(c).collect(),
            None => s,
        }
    }

    /// Report order: clusters as in the evaluation table, then declaration order.
    /// Cluster-grouped order used in reports.
    pub fn report_order() -> Vec<Dimension> {
        use Dimension::*;
        vec![
            Completeness,
            NoisyLabels,
            Accuracy,
            Currency,
            TargetClassBalance,
            Granularity,
            DatasetSize,
            Variety,
            FeatureImportance,
            Uniqueness,
            InformativeMissingness,
            Homogeneity,
            DistributionDrift,
            SyntacticConsistency,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueRange {
    pub interval: String,
    pub interpretation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Applicability {
    pub modalities: Vec<Modality>,
    pub variable_types: Vec<CardVarType>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pitfalls {
    pub tags: Vec<PitfallTag>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricCard {
    pub id: String,
    pub name: String,
    pub synonyms: Vec<String>,
    pub group: Group,
    pub summary: String,
    pub definition: String,
    pub value_range: ValueRange,
    pub dimensions: Vec<Dimension>,
    pub references: Vec<String>,
    pub example: Option<String>,
    pub relations: Vec<String>,
    pub applicability: Applicability,
    pub prerequisites: Vec<String>,
    pub pitfalls: Pitfalls,
    pub visualization: Option<String>,
}

const CARDS_JSON: &str = include_str!("../../data/cards.json");

fn validate(cards: &[MetricCard]) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for c in cards {
        if !seen.insert(c.id.as_str()) {
            return Err(Error::InvalidInput(format!("duplicate card id `{}`", c.id)));
        }
        if c.dimensions.is_empty() {
            return Err(Error::InvalidInput(format!("card `{}` has no dimensions", c.id)));
        }
    }
    for c in cards {
        if let Some(r) = c.relations.iter().find(|r| !seen.contains(r.as_str())) {
            return Err(Error::InvalidInput(format!("card `{}` relates to unknown `{r}`", c.id)));
        }
    }
    Ok(())
}

/// The built-in registry in stable order.
pub fn all_cards() -> &'static [MetricCard] {
    static CARDS: OnceLock<Vec<MetricCard>> = OnceLock::new();
    CARDS.get_or_init(|| {
        let cards: Vec<MetricCard> = serde_json::from_str(CARDS_JSON).expect("built-in cards parse");
        validate(&cards).expect("built-in cards are consistent");
        cards
    })
}

/// Look up a card by id; synonyms like `sample_entropy` resolve too.
pub fn card(id: &str) -> Result<&'static MetricCard> {
    let norm = id.trim().to_ascii_lowercase();
    let cards = all_cards();
    cards
        .iter()
        .find(|c| c.id == norm)
        .or_else(|| {
            cards.iter().find(|c| {
                c.synonyms
                    .iter()
                    .any(|s| s.to_ascii_lowercase().replace(['-', ' ', '\''], "_") == norm.replace(['-', ' '], "_"))
            })
        })
        .ok_or_else(|| Error::UnknownMetric(id.to_string()))
}

/// Conjunctive filter over the registry.
#[derive(Debug, Clone, Copy, Default)]
pub struct CardFilter {
    pub dimension: Option<Dimension>,
    pub modality: Option<Modality>,
    pub vtype: Option<CardVarType>,
    pub group: Option<Group>,
}

pub fn filter(f: CardFilter) -> Vec<&'static MetricCard> {
    all_cards()
        .iter()
        .filter(|c| f.dimension.is_none_or(|d| c.dimensions.contains(&d)))
        .filter(|c| f.modality.is_none_or(|m| c.applicability.modalities.contains(&m)))
        .filter(|c| f.vtype.is_none_or(|v| c.applicability.variable_types.contains(&v)))
        .filter(|c| f.group.is_none_or(|g| c.group == g))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CardFormat {
    Markdown,
    Json,
}

impl FromStr for CardFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(CardFormat::Markdown),
            "json" => Ok(CardFormat::Json),
            _ => Err(Error::UnknownValue { kind: "format", value: s.to_string() }),
        }
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn bullets(out: &mut String, items: &[String]) {
    for i in items {
        out.push_str(&format!("- {i}\n"));
    }
}

pub fn render_markdown(c: &MetricCard) -> String {
    let mut s = format!("# {}\n\n", c.name);
    if !c.synonyms.is_empty() {
        s.push_str(&format!("*Synonyms:* {}\n\n", c.synonyms.join(", ")));
    }
    s.push_str(&format!("{}\n\n", c.summary));
    s.push_str(&format!("## Definition\n\n`{}`\n\n", c.definition));
    s.push_str(&format!(
        "## Value range\n\n{}: {}\n\n",
        c.value_range.interval, c.value_range.interpretation
    ));
    if let Some(v) = &c.visualization {
        s.push_str(&format!("*Visualization:* {v}\n\n"));
    }
    s.push_str(&format!(
        "## Use in framework\n\nGroup: {}\n\nDimensions: {}\n\n",
        c.group,
        join(&c.dimensions)
    ));
    s.push_str("## References\n\n");
    bullets(&mut s, &c.references);
    s.push('\n');
    if let Some(e) = &c.example {
        s.push_str(&format!("## Example\n\n{e}\n\n"));
    }
    s.push_str("## Relation to other metrics\n\n");
    if c.relations.is_empty() {
        s.push_str("None listed.\n\n");
    } else {
        s.push_str(&format!("{}\n\n", c.relations.join(", ")));
    }
    s.push_str(&format!(
        "## Applicability\n\nModalities: {}\n\nVariable types: {}\n\n",
        join(&c.applicability.modalities),
        join(&c.applicability.variable_types)
    ));
    s.push_str("## Prerequisites and recommendations\n\n");
    if c.prerequisites.is_empty() {
        s.push_str("None.\n\n");
    } else {
        bullets(&mut s, &c.prerequisites);
        s.push('\n');
    }
    s.push_str("## Pitfalls and limitations\n\n");
    bullets(&mut s, &c.pitfalls.tags.iter().map(|t| t.to_string()).collect::<Vec<_>>());
    bullets(&mut s, &c.pitfalls.notes);
    if c.pitfalls.tags.is_empty() && c.pitfalls.notes.is_empty() {
        s.push_str("None known.\n");
    }
    s
}

pub fn render_card(id: &str, format: CardFormat) -> Result<String> {
    let c = card(id)?;
    Ok(match format {
        CardFormat::Markdown => render_markdown(c),
        CardFormat::Json => serde_json::to_string_pretty(c)?,
    })
}
