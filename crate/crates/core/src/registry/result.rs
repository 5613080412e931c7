use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A real number that survives JSON round trips, including ±∞ and NaN
/// (written as the strings "inf", "-inf" and "nan").
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Real;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Real, E> {
                Ok(Real(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Real, E> {
                match v {
                    "inf" => Ok(Real(f64::INFINITY)),
                    "-inf" => Ok(Real(f64::NEG_INFINITY)),
                    "nan" => Ok(Real(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Value produced by a metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricValue {
    Unavailable(()),
    Scalar(Real),
    Vector(Vec<Real>),
    Map(BTreeMap<String, MetricValue>),
}

impl MetricValue {
    pub fn scalar(x: f64) -> Self {
        MetricValue::Scalar(Real(x))
    }

    pub fn vector(v: &[f64]) -> Self {
        MetricValue::Vector(v.iter().map(|&x| Real(x)).collect())
    }

    pub fn map<I, K>(entries: I) -> Self
    where
        I: IntoIterator<Item = (K, MetricValue)>,
        K: Into<String>,
    {
        MetricValue::Map(entries.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn optional(x: Option<f64>) -> Self {
        x.map_or(MetricValue::Unavailable(()), MetricValue::scalar)
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            MetricValue::Scalar(r) => Some(r.0),
            _ => None,
        }
    }

    /// Value of a map entry.
    pub fn get(&self, key: &str) -> Option<&MetricValue> {
        match self {
            MetricValue::Map(m) => m.get(key),
            _ => None,
        }
    }

    /// Headline number: the scalar itself, or the conventional entry of a map.
    pub fn headline(&self) -> Option<f64> {
        match self {
            MetricValue::Scalar(r) => Some(r.0),
            MetricValue::Map(m) => ["value", "statistic", "mean", "count"]
                .iter()
                .find_map(|k| m.get(*k).and_then(MetricValue::as_scalar)),
            _ => None,
        }
    }

    /// Difference `self - other` over matching shapes.
    pub fn delta(&self, other: &MetricValue) -> Option<MetricValue> {
        match (self, other) {
            (MetricValue::Scalar(a), MetricValue::Scalar(b)) => Some(MetricValue::scalar(diff(a.0, b.0))),
            (MetricValue::Vector(a), MetricValue::Vector(b)) if a.len() == b.len() => Some(MetricValue::Vector(
                a.iter().zip(b).map(|(x, y)| Real(diff(x.0, y.0))).collect(),
            )),
            (MetricValue::Map(a), MetricValue::Map(b)) => {
                let m: BTreeMap<_, _> = a
                    .iter()
                    .filter_map(|(k, v)| Some((k.clone(), v.delta(b.get(k)?)?)))
                    .collect();
                (!m.is_empty()).then_some(MetricValue::Map(m))
            }
            _ => None,
        }
    }

    /// Human-readable form rounded to two decimals.
    pub fn display_rounded(&self) -> String {
        match self {
            MetricValue::Unavailable(()) => "n/a".into(),
            MetricValue::Scalar(r) => fmt2(r.0),
            MetricValue::Vector(v) => format!("[{}]", v.iter().map(|r| fmt2(r.0)).collect::<Vec<_>>().join(", ")),
            MetricValue::Map(m) => format!(
                "({})",
                m.iter()
                    .map(|(k, v)| format!("{k}: {}", v.display_rounded()))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        }
    }

    /// Copy with every number rounded to two decimals.
    pub fn rounded(&self) -> MetricValue {
        match self {
            MetricValue::Scalar(r) => MetricValue::scalar(round2(r.0)),
            MetricValue::Vector(v) => MetricValue::Vector(v.iter().map(|r| Real(round2(r.0))).collect()),
            MetricValue::Map(m) => MetricValue::Map(m.iter().map(|(k, v)| (k.clone(), v.rounded())).collect()),
            MetricValue::Unavailable(()) => MetricValue::Unavailable(()),
        }
    }
}

fn diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        a - b
    }
}

pub fn round2(x: f64) -> f64 {
    if x.is_finite() {
        let r = (x * 100.0).round() / 100.0;
        if r == 0.0 {
            0.0
        } else {
            r
        }
    } else {
        x
    }
}

pub fn fmt2(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{:.2}", round2(x))
    }
}

/// What part of the dataset a result describes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScopeTarget {
    Global,
    Signals,
    Column { name: String },
    Columns { names: Vec<String> },
    Pair { a: String, b: String },
    Groups { column: String, by: String, groups: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scope {
    #[serde(flatten)]
    pub target: ScopeTarget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
}

impl Scope {
    pub fn new(target: ScopeTarget) -> Self {
        Scope { target, context: None }
    }

    /// Short label used in report rows.
    pub fn label(&self) -> String {
        match &self.target {
            ScopeTarget::Global => "all".into(),
            ScopeTarget::Signals => "measurements".into(),
            ScopeTarget::Column { name } => name.clone(),
            ScopeTarget::Columns { names } => names.join(", "),
            ScopeTarget::Pair { a, b } => format!("{a}, {b}"),
            ScopeTarget::Groups { column, by, .. } => format!("{column} by {by}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub metric_id: String,
    pub scope: Scope,
    pub params: BTreeMap<String, serde_json::Value>,
    pub value: MetricValue,
    pub warnings: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_round_trip() {
        let v = MetricValue::map([
            ("a", MetricValue::scalar(f64::INFINITY)),
            ("b", MetricValue::scalar(-1.5)),
            ("p", MetricValue::optional(None)),
        ]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"a":"inf","b":-1.5,"p":null}"#);
        assert_eq!(serde_json::from_str::<MetricValue>(&s).unwrap(), v);
    }

    #[test]
    fn rounding() {
        assert_eq!(fmt2(1.4705), "1.47");
        assert_eq!(fmt2(-0.001), "0.00");
        assert_eq!(MetricValue::scalar(3.0).delta(&MetricValue::scalar(1.0)), Some(MetricValue::scalar(2.0)));
    }
}
