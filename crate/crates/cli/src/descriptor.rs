use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dq_core::data::{parse_timestamp, Column, ColumnSpec, Dataset, SignalFile, SignalFormat, SignalStore};
use serde::{Deserialize, Serialize};

/// On-disk description of a dataset. Relative paths resolve against the
/// descriptor's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_id: Option<String>,
    pub table: TableSource,
    pub columns: Vec<ColumnSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signals: Option<SignalSource>,
    /// Column name → newline-delimited dictionary file.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub dictionaries: BTreeMap<String, PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation_time: Option<String>,
    /// Row index file restricting the table to a subset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSource {
    pub path: PathBuf,
    #[serde(default = "comma")]
    pub delimiter: char,
}

fn comma() -> char {
    ','
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSource {
    pub dir: PathBuf,
    pub format: SignalFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling_hz: Option<f64>,
    #[serde(default)]
    pub channels: Vec<String>,
    /// Table column holding each record's payload path below `dir`.
    pub file_column: String,
    /// Appended to the file column's value.
    #[serde(default)]
    pub extension: String,
}

/// A descriptor together with the data it points to.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub id: String,
    pub descriptor: DatasetDescriptor,
    pub base: PathBuf,
    pub data: Dataset,
    pub dictionaries: BTreeMap<String, Vec<String>>,
    pub evaluation_time: Option<i64>,
}

impl DatasetDescriptor {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading descriptor {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing descriptor {}", path.display()))
    }

    /// Copy with every path made absolute against `base`.
    pub fn absolutized(&self, base: &Path) -> Self {
        let abs = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        let mut d = self.clone();
        d.table.path = abs(&self.table.path);
        if let Some(s) = &mut d.signals {
            s.dir = abs(&s.dir);
        }
        d.dictionaries = self.dictionaries.iter().map(|(k, v)| (k.clone(), abs(v))).collect();
        d.rows = self.rows.as_deref().map(abs);
        d
    }
}

pub fn read_rows(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading row index {}", path.display()))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.parse::<usize>().with_context(|| format!("{}: bad row index `{l}`", path.display())))
        .collect()
}

fn read_table(t: &TableSource) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let delim = u8::try_from(t.delimiter).context("table delimiter must be a single-byte character")?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delim)
        .from_path(&t.path)
        .with_context(|| format!("opening table {}", t.path.display()))?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut cols = vec![Vec::new(); header.len()];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: record {}", t.path.display(), i + 1))?;
        for (c, v) in rec.iter().enumerate().take(header.len()) {
            cols[c].push(v.to_string());
        }
    }
    Ok((header, cols))
}

fn signal_store(s: &SignalSource, files: &[String]) -> Result<SignalStore> {
    if !s.dir.is_dir() {
        bail!("signal directory {} does not exist", s.dir.display());
    }
    let entries = files
        .iter()
        .map(|f| {
            if f.trim().is_empty() {
                return Ok(None);
            }
            let path = s.dir.join(format!("{}{}", f.trim(), s.extension));
            if !path.is_file() {
                return Ok(None);
            }
            SignalFile::open(path, s.format, s.sampling_hz, &s.channels).map(Some).map_err(anyhow::Error::from)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SignalStore::Files(entries))
}

/// Load the table, signals, dictionaries and row subset named by the
/// descriptor at `path`.
pub fn load(path: &Path) -> Result<LoadedDataset> {
    let desc = DatasetDescriptor::read(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let id = desc.dataset_id.clone().unwrap_or_else(|| {
        path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into())
    });
    load_descriptor(desc, &base, id)
}

pub fn load_descriptor(desc: DatasetDescriptor, base: &Path, id: String) -> Result<LoadedDataset> {
    let abs = desc.absolutized(base);
    let (header, raw) = read_table(&abs.table)?;
    let mut columns = Vec::with_capacity(abs.columns.len());
    for spec in &abs.columns {
        let i = header
            .iter()
            .position(|h| h == &spec.name)
            .with_context(|| format!("column `{}` is not in the table header", spec.name))?;
        columns.push(Column::parse(spec.clone(), &raw[i])?);
    }
    let signals = match &abs.signals {
        Some(s) => {
            let i = header
                .iter()
                .position(|h| h == &s.file_column)
                .with_context(|| format!("signal file column `{}` is not in the table header", s.file_column))?;
            Some(signal_store(s, &raw[i])?)
        }
        None => None,
    };
    let mut data = Dataset::new(columns, signals)?;
    if let Some(rows) = &abs.rows {
        let rows = read_rows(rows)?;
        if let Some(bad) = rows.iter().find(|&&r| r >= data.n_records()) {
            bail!("row index {bad} out of range ({} records)", data.n_records());
        }
        data = data.select_rows(&rows)?;
    }
    let mut dictionaries = BTreeMap::new();
    for (col, p) in &abs.dictionaries {
        if !data.has_column(col) {
            bail!("dictionary given for unknown column `{col}`");
        }
        let text = fs::read_to_string(p).with_context(|| format!("reading dictionary {}", p.display()))?;
        let words: Vec<String> = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_string).collect();
        dictionaries.insert(col.clone(), words);
    }
    let evaluation_time = match &abs.evaluation_time {
        Some(t) => Some(parse_timestamp(t).with_context(|| format!("unparseable evaluation_time `{t}`"))?),
        None => None,
    };
    Ok(LoadedDataset { id, descriptor: desc, base: base.to_path_buf(), data, dictionaries, evaluation_time })
}

/// First column whose name or type differs between two descriptors.
pub fn schema_mismatch(a: &DatasetDescriptor, b: &DatasetDescriptor) -> Option<String> {
    for (i, x) in a.columns.iter().enumerate() {
        match b.columns.get(i) {
            None => return Some(format!("column `{}` missing from the second dataset", x.name)),
            Some(y) if y.name != x.name => {
                return Some(format!("column {} is `{}` in the first dataset and `{}` in the second", i + 1, x.name, y.name))
            }
            Some(y) if y.vtype != x.vtype => {
                return Some(format!("column `{}` has type {} in the first dataset and {} in the second", x.name, x.vtype, y.vtype))
            }
            _ => {}
        }
    }
    b.columns
        .get(a.columns.len())
        .map(|y| format!("column `{}` missing from the first dataset", y.name))
}
