use serde::{Deserialize, Serialize};

use super::column::VarType;
use super::dataset::Dataset;
use crate::error::{Error, Result};

/// Measurement scale of the labels in a [`RatingsMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatingScale {
    Nominal,
    Ordinal,
    Interval,
}

/// Items × raters grid of labels. Category labels are stored as integer
/// codes (index into `categories`); real-valued labels as-is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingsMatrix {
    values: Vec<Vec<Option<f64>>>,
    n_raters: usize,
    categories: Option<Vec<String>>,
    scale: RatingScale,
}

impl RatingsMatrix {
    pub fn from_numeric(rows: Vec<Vec<Option<f64>>>) -> Result<Self> {
        Self::build(rows, None, RatingScale::Interval)
    }

    /// Nominal labels; categories are coded in order of first appearance.
    pub fn from_categorical<S: AsRef<str>>(rows: &[Vec<Option<S>>]) -> Result<Self> {
        let mut cats: Vec<String> = Vec::new();
        let coded = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| {
                        c.as_ref().map(|s| {
                            let s = s.as_ref();
                            match cats.iter().position(|x| x == s) {
                                Some(i) => i as f64,
                                None => {
                                    cats.push(s.to_string());
                                    (cats.len() - 1) as f64
                                }
                            }
                        })
                    })
                    .collect()
            })
            .collect();
        Self::build(coded, Some(cats), RatingScale::Nominal)
    }

    /// Ordinal labels coded by position in `order`.
    pub fn from_ordinal<S: AsRef<str>>(rows: &[Vec<Option<S>>], order: &[String]) -> Result<Self> {
        let coded = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| match c {
                        None => Ok(None),
                        Some(s) => order
                            .iter()
                            .position(|x| x == s.as_ref())
                            .map(|i| Some(i as f64))
                            .ok_or_else(|| {
                                Error::InvalidInput(format!(
                                    "label `{}` not in ordinal order",
                                    s.as_ref()
                                ))
                            }),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::build(coded, Some(order.to_vec()), RatingScale::Ordinal)
    }

    fn build(values: Vec<Vec<Option<f64>>>, categories: Option<Vec<String>>, scale: RatingScale) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("ratings matrix has no items".into()));
        }
        let n_raters = values[0].len();
        if n_raters == 0 {
            return Err(Error::Empty("ratings matrix has no raters".into()));
        }
        if values.iter().any(|r| r.len() != n_raters) {
            return Err(Error::InvalidInput("ratings rows differ in rater count".into()));
        }
        Ok(RatingsMatrix {
            values,
            n_raters,
            categories,
            scale,
        })
    }

    /// One rater per column; the scale follows the first column's type.
    pub fn from_dataset(ds: &Dataset, raters: &[String]) -> Result<Self> {
        if raters.is_empty() {
            return Err(Error::Empty("no rater columns".into()));
        }
        let first = ds.column(&raters[0])?.spec().clone();
        for r in raters {
            let spec = ds.column(r)?.spec();
            if spec.vtype != first.vtype {
                return Err(Error::InvalidInput(format!(
                    "rater columns mix types ({} vs {})",
                    first.vtype, spec.vtype
                )));
            }
        }
        let n = ds.n_records();
        match first.vtype {
            VarType::Numerical => {
                let cols = raters
                    .iter()
                    .map(|r| ds.numeric_column(r))
                    .collect::<Result<Vec<_>>>()?;
                let rows = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
                Self::from_numeric(rows)
            }
            VarType::Ordinal => {
                let order = first.ordinal_order.clone().unwrap_or_default();
                let cols = raters
                    .iter()
                    .map(|r| ds.text_column(r))
                    .collect::<Result<Vec<_>>>()?;
                let rows: Vec<Vec<Option<String>>> =
                    (0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
                Self::from_ordinal(&rows, &order)
            }
            _ => {
                let cols = raters
                    .iter()
                    .map(|r| ds.text_column(r))
                    .collect::<Result<Vec<_>>>()?;
                let rows: Vec<Vec<Option<String>>> =
                    (0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
                Self::from_categorical(&rows)
            }
        }
    }

    pub fn n_items(&self) -> usize {
        self.values.len()
    }

    pub fn n_raters(&self) -> usize {
        self.n_raters
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.values
    }

    pub fn categories(&self) -> Option<&[String]> {
        self.categories.as_deref()
    }

    pub fn scale(&self) -> RatingScale {
        self.scale
    }

    pub fn get(&self, item: usize, rater: usize) -> Option<f64> {
        self.values[item][rater]
    }

    /// Distinct label codes in ascending order.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.values.iter().flatten().flatten().copied().collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Items rated by every rater.
    pub fn complete_rows(&self) -> Vec<Vec<f64>> {
        self.values
            .iter()
            .filter(|r| r.iter().all(Option::is_some))
            .map(|r| r.iter().map(|v| v.unwrap()).collect())
            .collect()
    }
}
