use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dq_core::data::Groups;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::descriptor::{read_rows, DatasetDescriptor, LoadedDataset};
use crate::report::write_json;

/// Stratified subset construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubsetRecipe {
    SexImbalance {
        n_male: usize,
        n_female: usize,
        seed: u64,
        #[serde(default = "sex_column")]
        column: String,
        #[serde(default = "male")]
        male: String,
        #[serde(default = "female")]
        female: String,
    },
    DeviceFilter {
        device_id: String,
        #[serde(default = "device_column")]
        column: String,
    },
    ClassImbalance {
        n_norm: usize,
        n_other: usize,
        seed: u64,
        column: String,
        #[serde(default = "norm")]
        norm: String,
        /// Set for multi-label cells; "norm" then means the label set is
        /// exactly `{norm}` and "other" means it lacks `norm`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        separator: Option<String>,
    },
}

fn sex_column() -> String {
    "sex".into()
}
fn male() -> String {
    "male".into()
}
fn female() -> String {
    "female".into()
}
fn device_column() -> String {
    "device".into()
}
fn norm() -> String {
    "NORM".into()
}

impl fmt::Display for SubsetRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubsetRecipe::SexImbalance { n_male, n_female, .. } => write!(f, "sex_imbalance_{n_male}_{n_female}"),
            SubsetRecipe::DeviceFilter { device_id, .. } => {
                let slug: String = device_id.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
                write!(f, "device_{slug}")
            }
            SubsetRecipe::ClassImbalance { n_norm, n_other, .. } => write!(f, "class_imbalance_{n_norm}_{n_other}"),
        }
    }
}

impl SubsetRecipe {
    /// Parse `kind:key=value,key=value`; `seed` falls back to `default_seed`.
    pub fn parse(text: &str, default_seed: u64) -> Result<Self> {
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut obj = serde_json::Map::new();
        obj.insert("kind".into(), kind.trim().into());
        obj.insert("seed".into(), default_seed.into());
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair.split_once('=').with_context(|| format!("recipe argument `{pair}` is not key=value"))?;
            let v = v.trim();
            let value = match v.parse::<u64>() {
                Ok(n) if !matches!(k.trim(), "male" | "female" | "norm" | "device_id" | "column" | "separator") => n.into(),
                _ => v.into(),
            };
            obj.insert(k.trim().into(), value);
        }
        serde_json::from_value(serde_json::Value::Object(obj)).with_context(|| format!("invalid recipe `{text}`"))
    }

    /// Row indices (ascending) of the subset within `ds`.
    pub fn select(&self, ds: &LoadedDataset) -> Result<Vec<usize>> {
        let data = &ds.data;
        let mut rows = match self {
            SubsetRecipe::SexImbalance { n_male, n_female, seed, column, male, female } => {
                let g = data.group_by(column)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut rows = draw(&g, male, *n_male, &mut rng)?;
                rows.extend(draw(&g, female, *n_female, &mut rng)?);
                rows
            }
            SubsetRecipe::DeviceFilter { device_id, column } => {
                let cells = data.text_column(column)?;
                let rows: Vec<usize> = (0..cells.len())
                    .filter(|&i| cells[i].as_deref().is_some_and(|c| device_matches(c, device_id)))
                    .collect();
                if rows.is_empty() {
                    bail!("no record has device `{device_id}`");
                }
                rows
            }
            SubsetRecipe::ClassImbalance { n_norm, n_other, seed, column, norm, separator } => {
                let cells = data.text_column(column)?;
                let labels = |c: &str| -> Vec<String> {
                    match separator {
                        Some(s) => c.split(s.as_str()).map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect(),
                        None => vec![c.trim().to_string()],
                    }
                };
                let mut norm_rows = Vec::new();
                let mut other_rows = Vec::new();
                for (i, c) in cells.iter().enumerate() {
                    let Some(c) = c else { continue };
                    let l = labels(c);
                    if l.is_empty() {
                        continue;
                    }
                    if l.iter().all(|x| x == norm) {
                        norm_rows.push(i);
                    } else if !l.contains(norm) {
                        other_rows.push(i);
                    }
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut rows = draw_from(&norm_rows, *n_norm, &mut rng, norm)?;
                rows.extend(draw_from(&other_rows, *n_other, &mut rng, "other")?);
                rows
            }
        };
        rows.sort_unstable();
        Ok(rows)
    }
}

/// `CS-12` matches `CS-12` and `CS-12   E` but not `CS-120`.
fn device_matches(cell: &str, device: &str) -> bool {
    let c = cell.trim();
    c == device || c.strip_prefix(device).is_some_and(|rest| rest.starts_with(char::is_whitespace))
}

fn draw(g: &Groups, key: &str, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let pool = g.groups.get(key).map(Vec::as_slice).unwrap_or(&[]);
    draw_from(pool, n, rng, key)
}

fn draw_from(pool: &[usize], n: usize, rng: &mut ChaCha8Rng, what: &str) -> Result<Vec<usize>> {
    if n > pool.len() {
        bail!("stratum `{what}` has {} records, {n} requested", pool.len());
    }
    Ok(sample(rng, pool.len(), n).into_iter().map(|i| pool[i]).collect())
}

/// Write `rows.txt` and a derived descriptor into `out`. Returns the
/// descriptor path.
pub fn write_subset(ds: &LoadedDataset, recipe: &SubsetRecipe, rows: &[usize], out: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut desc: DatasetDescriptor = ds.descriptor.absolutized(&ds.base);
    // compose with an existing subset so indices refer to the full table
    let original: Vec<usize> = match &desc.rows {
        Some(p) => {
            let base_rows = read_rows(p)?;
            rows.iter().map(|&r| base_rows[r]).collect()
        }
        None => rows.to_vec(),
    };
    let rows_path = out.join("rows.txt");
    let text: String = original.iter().map(|r| format!("{r}\n")).collect();
    fs::write(&rows_path, text).with_context(|| format!("writing {}", rows_path.display()))?;
    desc.rows = Some(PathBuf::from("rows.txt"));
    desc.dataset_id = Some(format!("{}-{recipe}", ds.id));
    let path = out.join("descriptor.json");
    write_json(&path, &desc)?;
    write_json(&out.join("recipe.json"), recipe)?;
    Ok(path)
}
