use std::collections::HashSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::column::{ColumnSpec, Role, VarType};
use super::sample::{Binning, CategoricalCounts, Sample};
use super::signal::SignalStore;
use crate::error::{Error, Result};

/// A single non-missing cell value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Time(i64),
    Text(String),
}

impl Value {
    /// Canonical text form used for grouping and duplicate detection.
    pub fn key(&self) -> String {
        match self {
            Value::Number(x) => format!("{x}"),
            Value::Time(t) => t.to_string(),
            Value::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    spec: ColumnSpec,
    cells: Vec<Option<Value>>,
}

impl Column {
    pub fn new(spec: ColumnSpec, cells: Vec<Option<Value>>) -> Self {
        Column { spec, cells }
    }

    pub fn numeric(spec: ColumnSpec, values: Vec<Option<f64>>) -> Self {
        let cells = values
            .into_iter()
            .map(|v| v.filter(|x| x.is_finite()).map(Value::Number))
            .collect();
        Column { spec, cells }
    }

    pub fn text<S: Into<String>>(spec: ColumnSpec, values: Vec<Option<S>>) -> Self {
        let cells = values
            .into_iter()
            .map(|v| v.map(|s| Value::Text(s.into())))
            .collect();
        Column { spec, cells }
    }

    /// Parse raw text cells according to the column spec. Missing tokens
    /// (and empty strings) become missing cells.
    pub fn parse<S: AsRef<str>>(spec: ColumnSpec, raw: &[S]) -> Result<Self> {
        let mut cells = Vec::with_capacity(raw.len());
        for (row, r) in raw.iter().enumerate() {
            let r = r.as_ref();
            if spec.is_missing_token(r) {
                cells.push(None);
                continue;
            }
            let t = r.trim();
            let cell = match spec.vtype {
                VarType::Numerical => {
                    let x: f64 = t.parse().map_err(|_| {
                        Error::InvalidDataset(format!(
                            "column `{}` row {row}: `{t}` is not a number",
                            spec.name
                        ))
                    })?;
                    if x.is_finite() {
                        Some(Value::Number(x))
                    } else {
                        None
                    }
                }
                VarType::Datetime => Some(Value::Time(parse_timestamp(t).ok_or_else(|| {
                    Error::InvalidDataset(format!(
                        "column `{}` row {row}: `{t}` is not a timestamp",
                        spec.name
                    ))
                })?)),
                VarType::Categorical | VarType::Ordinal | VarType::Identifier => {
                    Some(Value::Text(t.to_string()))
                }
            };
            cells.push(cell);
        }
        Ok(Column { spec, cells })
    }

    pub fn spec(&self) -> &ColumnSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn cells(&self) -> &[Option<Value>] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }

    /// Numeric view of a cell: numbers as-is, ordinal categories as their
    /// 0-based position in the declared order, timestamps as seconds.
    pub fn numeric_at(&self, i: usize) -> Option<f64> {
        match self.cells.get(i)?.as_ref()? {
            Value::Number(x) => Some(*x),
            Value::Time(t) => Some(*t as f64),
            Value::Text(s) => {
                if self.spec.vtype == VarType::Ordinal {
                    self.ordinal_code(s).map(|c| c as f64)
                } else {
                    None
                }
            }
        }
    }

    fn ordinal_code(&self, s: &str) -> Option<usize> {
        self.spec
            .ordinal_order
            .as_ref()
            .and_then(|o| o.iter().position(|c| c == s))
    }

    pub fn is_numeric(&self) -> bool {
        matches!(
            self.spec.vtype,
            VarType::Numerical | VarType::Ordinal | VarType::Datetime
        )
    }
}

/// Parse a timestamp into seconds since the Unix epoch. Accepts integer
/// seconds, RFC 3339, `YYYY-MM-DD HH:MM:SS` and `YYYY-MM-DD`.
pub fn parse_timestamp(s: &str) -> Option<i64> {
    use chrono::{DateTime, NaiveDate, NaiveDateTime};
    let s = s.trim();
    if let Ok(v) = s.parse::<i64>() {
        return Some(v);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc().timestamp())
}

/// Partition of records by category.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Groups {
    pub groups: IndexMap<String, Vec<usize>>,
    pub missing: Vec<usize>,
}

/// Immutable column-major table with optional per-record signals.
#[derive(Debug, Clone)]
pub struct Dataset {
    columns: Vec<Column>,
    signals: Option<SignalStore>,
    n_records: usize,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, signals: Option<SignalStore>) -> Result<Self> {
        let n_records = match (columns.first(), &signals) {
            (Some(c), _) => c.len(),
            (None, Some(s)) => s.len(),
            (None, None) => 0,
        };
        let mut names = HashSet::new();
        let mut unique_roles = HashSet::new();
        for col in &columns {
            let spec = col.spec();
            if !names.insert(spec.name.as_str()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate column name `{}`",
                    spec.name
                )));
            }
            if col.len() != n_records {
                return Err(Error::InvalidDataset(format!(
                    "column `{}` has {} cells, expected {n_records}",
                    spec.name,
                    col.len()
                )));
            }
            if spec.role.is_unique() && !unique_roles.insert(spec.role) {
                return Err(Error::InvalidDataset(format!(
                    "more than one column with role {}",
                    spec.role
                )));
            }
            if spec.vtype == VarType::Ordinal {
                let order = spec.ordinal_order.as_ref().ok_or_else(|| {
                    Error::InvalidDataset(format!(
                        "ordinal column `{}` has no ordinal_order",
                        spec.name
                    ))
                })?;
                for v in col.cells().iter().flatten() {
                    if !order.contains(&v.key()) {
                        return Err(Error::InvalidDataset(format!(
                            "ordinal column `{}`: category `{}` not in ordinal_order",
                            spec.name,
                            v.key()
                        )));
                    }
                }
            }
        }
        if let Some(s) = &signals {
            if s.len() != n_records {
                return Err(Error::InvalidDataset(format!(
                    "signal store has {} records, table has {n_records}",
                    s.len()
                )));
            }
        }
        Ok(Dataset {
            columns,
            signals,
            n_records,
        })
    }

    /// Build from column-major raw text.
    pub fn from_text_columns<S: AsRef<str>>(specs: Vec<ColumnSpec>, raw: &[Vec<S>]) -> Result<Self> {
        if specs.len() != raw.len() {
            return Err(Error::InvalidDataset(format!(
                "{} column specs for {} raw columns",
                specs.len(),
                raw.len()
            )));
        }
        let cols = specs
            .into_iter()
            .zip(raw)
            .map(|(spec, cells)| Column::parse(spec, cells))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(cols, None)
    }

    pub fn n_records(&self) -> usize {
        self.n_records
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn signals(&self) -> Option<&SignalStore> {
        self.signals.as_ref()
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c.name() == name)
    }

    pub fn column_with_role(&self, role: Role) -> Option<&Column> {
        self.columns.iter().find(|c| c.spec().role == role)
    }

    pub fn columns_with_role(&self, role: Role) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(move |c| c.spec().role == role)
    }

    /// Values of a numerical (or ordinal) column in record order with
    /// missing cells dropped.
    pub fn column_sample(&self, name: &str) -> Result<Sample> {
        let col = self.column(name)?;
        match col.spec().vtype {
            VarType::Numerical | VarType::Ordinal => {}
            other => {
                return Err(Error::ColumnType {
                    column: name.to_string(),
                    expected: "numerical or ordinal".into(),
                    actual: other.to_string(),
                })
            }
        }
        let mut values = Vec::with_capacity(col.len());
        let mut dropped = 0;
        for i in 0..col.len() {
            match col.numeric_at(i) {
                Some(x) => values.push(x),
                None => dropped += 1,
            }
        }
        Ok(Sample::with_dropped(values, dropped))
    }

    /// Raw numeric view with missing cells kept in place, for pairwise deletion.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let col = self.column(name)?;
        if !col.is_numeric() {
            return Err(Error::ColumnType {
                column: name.to_string(),
                expected: "numerical, ordinal or datetime".into(),
                actual: col.spec().vtype.to_string(),
            });
        }
        Ok((0..col.len()).map(|i| col.numeric_at(i)).collect())
    }

    /// Text view of any column (missing kept as `None`).
    pub fn text_column(&self, name: &str) -> Result<Vec<Option<String>>> {
        let col = self.column(name)?;
        Ok(col.cells().iter().map(|c| c.as_ref().map(Value::key)).collect())
    }

    /// Partition non-missing records by category.
    pub fn group_by(&self, name: &str) -> Result<Groups> {
        let col = self.column(name)?;
        match col.spec().vtype {
            VarType::Categorical | VarType::Ordinal | VarType::Identifier => {}
            VarType::Numerical | VarType::Datetime => {
                return Err(Error::ColumnType {
                    column: name.to_string(),
                    expected: "categorical or ordinal (numerical columns need binning)".into(),
                    actual: col.spec().vtype.to_string(),
                })
            }
        }
        let mut groups: IndexMap<String, Vec<usize>> = IndexMap::new();
        if let Some(order) = &col.spec().ordinal_order {
            for c in order {
                groups.insert(c.clone(), Vec::new());
            }
        }
        let mut missing = Vec::new();
        for (i, cell) in col.cells().iter().enumerate() {
            match cell {
                Some(v) => groups.entry(v.key()).or_default().push(i),
                None => missing.push(i),
            }
        }
        groups.retain(|_, v| !v.is_empty());
        Ok(Groups { groups, missing })
    }

    /// Partition a numerical column by histogram bin.
    pub fn group_by_binned(&self, name: &str, binning: &Binning) -> Result<Groups> {
        let raw = self.numeric_column(name)?;
        let present: Vec<f64> = raw.iter().flatten().copied().collect();
        if present.is_empty() {
            return Err(Error::Empty(format!("column `{name}` has no values")));
        }
        let (edges, _) = binning.edges(&present)?;
        let mut groups: IndexMap<String, Vec<usize>> = IndexMap::new();
        let mut missing = Vec::new();
        for (i, v) in raw.iter().enumerate() {
            match v {
                Some(x) => {
                    let b = super::sample::bin_index(&edges, *x).ok_or_else(|| {
                        Error::InvalidInput(format!("value {x} outside binning edges"))
                    })?;
                    groups.entry(format!("bin{b}")).or_default().push(i);
                }
                None => missing.push(i),
            }
        }
        Ok(Groups { groups, missing })
    }

    /// Category counts of a categorical/ordinal column (missing excluded).
    pub fn categorical_counts(&self, name: &str) -> Result<CategoricalCounts> {
        let groups = self.group_by(name)?;
        Ok(groups
            .groups
            .iter()
            .map(|(k, v)| (k.clone(), v.len() as u64))
            .collect())
    }

    /// A new dataset holding the given records in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_records) {
            return Err(Error::InvalidInput(format!(
                "row {bad} out of range for {} records",
                self.n_records
            )));
        }
        let columns = self
            .columns
            .iter()
            .map(|c| {
                Column::new(
                    c.spec().clone(),
                    rows.iter().map(|&r| c.cells()[r].clone()).collect(),
                )
            })
            .collect();
        let signals = self.signals.as_ref().map(|s| s.select(rows));
        Dataset::new(columns, signals)
    }

    /// Number of non-missing cells and total cells over all columns.
    pub fn cell_counts(&self) -> (usize, usize) {
        let total = self.n_records * self.columns.len();
        let missing: usize = self.columns.iter().map(Column::missing_count).sum();
        (total - missing, total)
    }
}
