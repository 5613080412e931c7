//! Case study on a locally staged copy of PTB-XL.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dq_core::data::{ColumnSpec, Role, SignalFormat, VarType};
use dq_core::selection::{rationale_document, select_all, Mode, UseCaseProfile};
use serde::{Deserialize, Serialize};

use crate::descriptor::{load, DatasetDescriptor, LoadedDataset, SignalSource, TableSource};
use crate::report::{build_report, markdown_grid, scope_label, write_json, ParamOverrides, Report, ResultRow};
use crate::subset::{write_subset, SubsetRecipe};

pub const PTBXL_PROFILE: &str = include_str!("../../../profiles/ptbxl.json");
pub const DEFAULT_EVALUATION_TIME: &str = "2025-01-01T00:00:00Z";
const TARGET: &str = "diagnostic_superclass";

pub fn ptbxl_profile() -> UseCaseProfile {
    UseCaseProfile::from_json(PTBXL_PROFILE).expect("bundled profile parses")
}

/// The 26 metadata columns and their types.
pub fn ptbxl_columns() -> Vec<ColumnSpec> {
    use VarType::*;
    let c = |name: &str, t: VarType| ColumnSpec::new(name, t);
    vec![
        c("ecg_id", Identifier),
        c("patient_id", Identifier).with_role(Role::PatientId),
        c("age", Numerical),
        c("sex", Categorical),
        c("height", Numerical),
        c("weight", Numerical),
        c("nurse", Categorical),
        c("site", Categorical),
        c("device", Categorical),
        c("recording_date", Datetime).with_role(Role::Timestamp),
        c("report", Identifier),
        c("scp_codes", Identifier),
        c("heart_axis", Categorical),
        c("infarction_stadium1", Categorical),
        c("infarction_stadium2", Categorical),
        c("validated_by", Categorical),
        c("second_opinion", Categorical),
        c("initial_autogenerated_report", Categorical),
        c("validated_by_human", Categorical),
        c("baseline_drift", Categorical),
        c("static_noise", Categorical),
        c("burst_noise", Categorical),
        c("electrodes_problems", Categorical),
        c("extra_beats", Categorical),
        c("pacemaker", Categorical),
        c("strat_fold", Categorical),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
    /// Exact checks compare with a published value; directional ones only with
    /// the original dataset.
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum HarnessOutcome {
    Skipped { reason: String },
    Ran { checks: Vec<Check>, reports: Vec<PathBuf>, markdown: PathBuf },
}

impl HarnessOutcome {
    pub fn all_passed(&self) -> Option<bool> {
        match self {
            HarnessOutcome::Skipped { .. } => None,
            HarnessOutcome::Ran { checks, .. } => Some(checks.iter().all(|c| c.passed)),
        }
    }
}

/// `{'NORM': 100.0, 'SR': 0.0}` → codes.
fn scp_codes(s: &str) -> Vec<String> {
    s.trim()
        .trim_start_matches('{')
        .trim_end_matches('}')
        .split(',')
        .filter_map(|kv| kv.split_once(':'))
        .map(|(k, _)| k.trim().trim_matches(|c| c == '\'' || c == '"').to_string())
        .filter(|k| !k.is_empty())
        .collect()
}

/// Diagnostic code → superclass, from `scp_statements.csv`.
fn superclass_map(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = rdr.headers()?.clone();
    let col = |n: &str| header.iter().position(|h| h == n);
    let diag = col("diagnostic").context("scp_statements.csv lacks `diagnostic`")?;
    let class = col("diagnostic_class").context("scp_statements.csv lacks `diagnostic_class`")?;
    let mut map = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let is_diag = rec.get(diag).and_then(|v| v.trim().parse::<f64>().ok()) == Some(1.0);
        let cls = rec.get(class).unwrap_or("").trim();
        if is_diag && !cls.is_empty() {
            map.insert(rec.get(0).unwrap_or("").trim().to_string(), cls.to_string());
        }
    }
    Ok(map)
}

/// Copy the metadata table with a `diagnostic_superclass` column holding
/// the `;`-joined superclasses of each record's diagnostic codes.
fn augment_table(root: &Path, out: &Path) -> Result<()> {
    let classes = superclass_map(&root.join("scp_statements.csv"))?;
    let src = root.join("ptbxl_database.csv");
    let mut rdr = csv::Reader::from_path(&src).with_context(|| format!("opening {}", src.display()))?;
    let mut header = rdr.headers()?.clone();
    let scp = header.iter().position(|h| h == "scp_codes").context("ptbxl_database.csv lacks `scp_codes`")?;
    header.push_field(TARGET);
    let mut w = csv::Writer::from_path(out).with_context(|| format!("writing {}", out.display()))?;
    w.write_record(&header)?;
    for rec in rdr.records() {
        let mut rec = rec?;
        let mut sup: Vec<&str> =
            scp_codes(rec.get(scp).unwrap_or("")).iter().filter_map(|c| classes.get(c).map(String::as_str)).collect();
        sup.sort_unstable();
        sup.dedup();
        rec.push_field(&sup.join(";"));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn descriptor(root: &Path, table: &Path, evaluation_time: &str) -> DatasetDescriptor {
    let mut columns = ptbxl_columns();
    columns.push(ColumnSpec::new(TARGET, VarType::Categorical).with_role(Role::Target));
    let signals = root.join("records500").is_dir().then(|| SignalSource {
        dir: root.to_path_buf(),
        format: SignalFormat::F32le,
        sampling_hz: None,
        channels: Vec::new(),
        file_column: "filename_hr".into(),
        extension: ".f32".into(),
    });
    DatasetDescriptor {
        dataset_id: Some("ptbxl".into()),
        table: TableSource { path: table.to_path_buf(), delimiter: ',' },
        columns,
        signals,
        dictionaries: BTreeMap::new(),
        evaluation_time: Some(evaluation_time.into()),
        rows: None,
    }
}

fn has_any_signal(ds: &LoadedDataset) -> bool {
    ds.data.signals().is_some_and(|s| (0..s.len()).any(|i| s.has_signal(i)))
}

pub struct HarnessOptions {
    pub root: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub evaluation_time: String,
}

/// Original dataset plus the three disturbed subsets.
pub fn recipes(seed: u64) -> [SubsetRecipe; 3] {
    [
        SubsetRecipe::SexImbalance {
            n_male: 4000,
            n_female: 1000,
            seed,
            column: "sex".into(),
            male: "0".into(),
            female: "1".into(),
        },
        SubsetRecipe::DeviceFilter { device_id: "CS-12".into(), column: "device".into() },
        SubsetRecipe::ClassImbalance {
            n_norm: 250,
            n_other: 4750,
            seed,
            column: TARGET.into(),
            norm: "NORM".into(),
            separator: Some(";".into()),
        },
    ]
}

pub fn run_harness(o: &HarnessOptions) -> Result<HarnessOutcome> {
    let db = o.root.join("ptbxl_database.csv");
    if !db.is_file() {
        return Ok(HarnessOutcome::Skipped {
            reason: format!("PTB-XL not found: {} does not exist", db.display()),
        });
    }
    if !o.root.join("scp_statements.csv").is_file() {
        return Ok(HarnessOutcome::Skipped {
            reason: format!("PTB-XL incomplete: {} lacks scp_statements.csv", o.root.display()),
        });
    }
    let orig_dir = o.out.join("original");
    fs::create_dir_all(&orig_dir).with_context(|| format!("creating {}", orig_dir.display()))?;
    let table = orig_dir.join("ptbxl_with_superclass.csv");
    augment_table(&o.root, &table)?;
    let mut desc = descriptor(&o.root, &table, &o.evaluation_time);
    let desc_path = orig_dir.join("descriptor.json");
    write_json(&desc_path, &desc)?;
    let mut original = load(&desc_path)?;
    if desc.signals.is_some() && !has_any_signal(&original) {
        log::warn!("records500 holds no converted .f32 payloads; signal metrics will be unavailable");
        desc.signals = None;
        write_json(&desc_path, &desc)?;
        original = load(&desc_path)?;
    }

    let profile = ptbxl_profile();
    let sel = select_all(&profile, Mode::Strict);
    let mut params = BTreeMap::new();
    params.insert("seed".into(), o.seed.into());
    params.insert("evaluation_time".into(), o.evaluation_time.clone().into());
    let doc = rationale_document(&sel, &profile, params);
    write_json(&o.out.join("selection.json"), &doc)?;

    let mut datasets = vec![original];
    for r in recipes(o.seed) {
        let rows = r.select(&datasets[0])?;
        let path = write_subset(&datasets[0], &r, &rows, &o.out.join(r.to_string()))?;
        datasets.push(load(&path)?);
    }
    let mut reports = Vec::new();
    let mut paths = Vec::new();
    for ds in &datasets {
        log::info!("evaluating {}", ds.id);
        let rep = build_report(ds, &doc, &ParamOverrides::default(), o.seed);
        let p = o.out.join(format!("{}.report.json", ds.id));
        write_json(&p, &rep)?;
        paths.push(p);
        reports.push(rep);
    }
    let refs: Vec<&Report> = reports.iter().collect();
    let md = markdown_grid("Evaluation of the selected metrics on PTB-XL and three disturbed subsets", &refs);
    let md_path = o.out.join("ptbxl_table.md");
    fs::write(&md_path, &md).with_context(|| format!("writing {}", md_path.display()))?;
    let checks = checks(&reports);
    write_json(&o.out.join("checks.json"), &checks)?;
    Ok(HarnessOutcome::Ran { checks, reports: paths, markdown: md_path })
}

fn find<'a>(r: &'a Report, metric: &str, scope: &str) -> Option<&'a ResultRow> {
    r.results.iter().find(|x| x.metric_id == metric && scope_label(&x.scope) == scope && x.error.is_none())
}

fn headline(r: &Report, metric: &str, scope: &str) -> Option<f64> {
    find(r, metric, scope).and_then(|x| x.value.headline())
}

fn show(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_else(|| "unavailable".into())
}

/// Exact and directional comparisons with the published table.
pub fn checks(reports: &[Report]) -> Vec<Check> {
    let [orig, sex, device, class] = [&reports[0], &reports[1], &reports[2], &reports[3]];
    let mut out = Vec::new();
    let mut exact = |name: &str, v: Option<f64>, want: f64, tol: f64| {
        out.push(Check {
            name: name.into(),
            expected: if tol == 0.0 { format!("{want}") } else { format!("{want} ± {tol}") },
            actual: show(v),
            passed: v.is_some_and(|x| (x - want).abs() <= tol),
            kind: "exact".into(),
        });
    };
    exact("dataset size (original)", headline(orig, "dataset_size", "all"), 21837.0, 0.0);
    exact("granularity (original)", headline(orig, "granularity", "all"), 26.0, 0.0);
    exact("sampling frequency (original)", headline(orig, "sampling_frequency", "measurements"), 500.0, 0.0);
    exact("duplicates (original)", headline(orig, "prevalence_of_duplicates", "all"), 0.0, 0.0);
    exact("measurement completeness (original)", headline(orig, "completeness", "measurements"), 1.0, 0.0);
    exact("Hill number of device (original)", headline(orig, "hill_number", "device"), 5.59, 0.01);
    exact("Hill number of device (device subset)", headline(device, "hill_number", "device"), 1.0, 1e-9);
    exact("dataset size (sex subset)", headline(sex, "dataset_size", "all"), 5000.0, 0.0);
    exact("dataset size (device subset)", headline(device, "dataset_size", "all"), 4048.0, 0.0);
    exact("dataset size (class subset)", headline(class, "dataset_size", "all"), 5000.0, 0.0);
    exact("Hill number of sex (sex subset)", headline(sex, "hill_number", "sex"), 1.0 / 0.68, 0.005);

    let mut direction = |name: &str, base: Option<f64>, sub: Option<f64>, rises: bool| {
        let passed = match (base, sub) {
            (Some(b), Some(s)) => if rises { s > b } else { s < b },
            _ => false,
        };
        out.push(Check {
            name: name.into(),
            expected: format!("{} than original {}", if rises { "higher" } else { "lower" }, show(base)),
            actual: show(sub),
            passed,
            kind: "directional".into(),
        });
    };
    let ent = |r: &Report| headline(r, "entropy", "measurements");
    direction("entropy rises for the device subset", ent(orig), ent(device), true);
    let hs = |r: &Report| headline(r, "hill_number", "sex");
    direction("Hill number of sex falls for the sex subset", hs(orig), hs(sex), false);
    let ir = |r: &Report| headline(r, "imbalance_ratio", TARGET);
    direction("imbalance ratio rises for the class subset", ir(orig), ir(class), true);
    out
}
