use std::collections::HashSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Role};
use crate::error::{Error, Result};
use crate::outcome::Flagged;

/// Non-missing cells over all cells of the given columns (all columns when
/// `columns` is `None`).
pub fn completeness(ds: &Dataset, columns: Option<&[String]>) -> Result<f64> {
    let (present, total) = match columns {
        None => ds.cell_counts(),
        Some(cols) => {
            let mut missing = 0;
            for c in cols {
                missing += ds.column(c)?.missing_count();
            }
            let total = cols.len() * ds.n_records();
            (total - missing, total)
        }
    };
    if total == 0 {
        return Err(Error::Empty("no cells in scope".into()));
    }
    Ok(present as f64 / total as f64)
}

/// Fraction of records carrying a signal block.
pub fn signal_completeness(ds: &Dataset) -> Result<f64> {
    let s = ds
        .signals()
        .ok_or_else(|| Error::InvalidInput("dataset has no signals".into()))?;
    if s.is_empty() {
        return Err(Error::Empty("no records".into()));
    }
    Ok((0..s.len()).filter(|&i| s.has_signal(i)).count() as f64 / s.len() as f64)
}

/// The variable whose presence is checked per patient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatientVariable {
    Column(String),
    Signal,
}

/// Patients with at least one non-missing value of `variable` over all patients.
pub fn patient_level_completeness(ds: &Dataset, patient_col: Option<&str>, variable: &PatientVariable) -> Result<f64> {
    let pid = match patient_col {
        Some(name) => ds.column(name)?,
        None => ds
            .column_with_role(Role::PatientId)
            .ok_or_else(|| Error::InvalidInput("no column has the patient_id role".into()))?,
    };
    let ids = ds.text_column(pid.name())?;
    let present: Vec<bool> = match variable {
        PatientVariable::Column(c) => ds.column(c)?.cells().iter().map(Option::is_some).collect(),
        PatientVariable::Signal => {
            let s = ds
                .signals()
                .ok_or_else(|| Error::InvalidInput("dataset has no signals".into()))?;
            (0..ds.n_records()).map(|i| s.has_signal(i)).collect()
        }
    };
    let mut seen: IndexMap<String, bool> = IndexMap::new();
    for (id, ok) in ids.iter().zip(present) {
        if let Some(id) = id {
            *seen.entry(id.clone()).or_insert(false) |= ok;
        }
    }
    if seen.is_empty() {
        return Err(Error::Empty("no patient identifiers".into()));
    }
    Ok(seen.values().filter(|&&v| v).count() as f64 / seen.len() as f64)
}

/// Records whose required fields are all present over all records.
pub fn record_completeness(ds: &Dataset, required: &[String]) -> Result<Flagged<f64>> {
    let cols = required.iter().map(|c| ds.column(c)).collect::<Result<Vec<_>>>()?;
    if required.is_empty() {
        return Ok(Flagged::warn(1.0, "no required fields: vacuously complete"));
    }
    if ds.n_records() == 0 {
        return Err(Error::Empty("no records".into()));
    }
    let complete = (0..ds.n_records())
        .filter(|&i| cols.iter().all(|c| c.cells()[i].is_some()))
        .count();
    Ok(Flagged::clean(complete as f64 / ds.n_records() as f64))
}

/// Distinct-name helper used by callers assembling column scopes.
pub fn dedup_columns(cols: &[String]) -> Vec<String> {
    let mut seen = HashSet::new();
    cols.iter().filter(|c| seen.insert(c.as_str())).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ColumnSpec, VarType};

    fn ds() -> Dataset {
        Dataset::from_text_columns(
            vec![
                ColumnSpec::new("pid", VarType::Identifier).with_role(Role::PatientId),
                ColumnSpec::new("x", VarType::Numerical),
            ],
            &[vec!["p1", "p1", "p2"], vec!["1", "", ""]],
        )
        .unwrap()
    }

    #[test]
    fn completeness_ratios() {
        let d = ds();
        assert!((completeness(&d, None).unwrap() - 4.0 / 6.0).abs() < 1e-15);
        assert!((completeness(&d, Some(&["x".to_string()])).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let pl = patient_level_completeness(&d, None, &PatientVariable::Column("x".into())).unwrap();
        assert_eq!(pl, 0.5);
        assert!((record_completeness(&d, &["x".into()]).unwrap().value - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(record_completeness(&d, &[]).unwrap().value, 1.0);
    }
}
