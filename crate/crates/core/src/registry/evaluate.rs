use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde_json::Value as Json;

use super::card::{card, CardVarType, MetricCard};
use super::result::{MetricResult, MetricValue, Scope, ScopeTarget};
use crate::correlation::{
    concordance_cc, contingency, correlation, cramers_v, icc, pairwise_complete, CorrelationKind,
};
use crate::data::{
    parse_timestamp, Binning, CategoricalCounts, Column, Dataset, RatingsMatrix, Role, Sample, VarType,
};
use crate::distribution::{
    anderson_darling_k, chi_squared, cohens_d, divergence_counts, divergence_samples, energy_distance,
    epps_singleton, frechet_gaussian, hill_number, kid, ks_2samp, mann_whitney_u, mmd, summary_stats,
    wasserstein_1d, DivergenceKind, EmbeddingSet, Kernel, Smoothing, TestOutcome,
};
use crate::error::{Error, Result};
use crate::measurement::{
    bland_altman_cr, cohens_kappa, completeness, fleiss_kappa, instrument_error, kendalls_w,
    krippendorff_alpha, lod_loq, overlap, patient_level_completeness, record_completeness,
    repeatability_cv, reproducibility_variance, sample_entropy, shannon_entropy, signal_completeness,
    AlphaLevel, KappaWeights, OverlapKind, PatientVariable, RepeatedMeasures, SampleEntropyParams,
};
use crate::structure::{
    currency, dataset_size, effective_sample_size, granularity_of, imbalance_degree, imbalance_ratio,
    informative_dropout, label_granularity, littles_mcar_test, lrid, page_hinkley,
    prevalence_of_duplicates, resolution, sampling_frequency, syntactic_accuracy, CurrencyModel,
    EssInput, PageHinkleyParams,
};

pub type ParamMap = serde_json::Map<String, Json>;

/// Default cap on vectors fed to quadratic-cost kernel metrics.
const KERNEL_MAX_N: u64 = 2000;

/// Parameter reader that records every value it hands out, defaults included.
struct Args<'a> {
    input: &'a ParamMap,
    used: BTreeMap<String, Json>,
    card: &'static MetricCard,
    ds: &'a Dataset,
    warnings: Vec<String>,
}

impl<'a> Args<'a> {
    fn raw(&self, key: &str) -> Option<&'a Json> {
        self.input.get(key).filter(|v| !v.is_null())
    }

    fn record(&mut self, key: &str, v: impl Into<Json>) {
        self.used.insert(key.to_string(), v.into());
    }

    fn str_opt(&mut self, key: &str) -> Result<Option<String>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Json::String(s)) => {
                self.record(key, s.clone());
                Ok(Some(s.clone()))
            }
            Some(other) => Err(Error::param(key, format!("expected a string, got {other}"))),
        }
    }

    fn str_req(&mut self, key: &str) -> Result<String> {
        self.str_opt(key)?.ok_or_else(|| Error::MissingParameter(key.into()))
    }

    fn str_or(&mut self, key: &str, default: &str) -> Result<String> {
        match self.str_opt(key)? {
            Some(s) => Ok(s),
            None => {
                self.record(key, default);
                Ok(default.into())
            }
        }
    }

    fn f64_opt(&mut self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => {
                let x = v
                    .as_f64()
                    .ok_or_else(|| Error::param(key, format!("expected a number, got {v}")))?;
                self.record(key, v.clone());
                Ok(Some(x))
            }
        }
    }

    fn f64_req(&mut self, key: &str) -> Result<f64> {
        self.f64_opt(key)?.ok_or_else(|| Error::MissingParameter(key.into()))
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.f64_opt(key)? {
            Some(x) => Ok(x),
            None => {
                self.record(key, default);
                Ok(default)
            }
        }
    }

    fn u64_opt(&mut self, key: &str) -> Result<Option<u64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => {
                let x = v
                    .as_u64()
                    .ok_or_else(|| Error::param(key, format!("expected a nonnegative integer, got {v}")))?;
                self.record(key, x);
                Ok(Some(x))
            }
        }
    }

    fn u64_or(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.u64_opt(key)? {
            Some(x) => Ok(x),
            None => {
                self.record(key, default);
                Ok(default)
            }
        }
    }

    fn list_opt(&mut self, key: &str) -> Result<Option<Vec<String>>> {
        let v = match self.raw(key) {
            None => return Ok(None),
            Some(Json::String(s)) => vec![s.clone()],
            Some(Json::Array(a)) => a
                .iter()
                .map(|x| {
                    x.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| Error::param(key, "expected a list of strings"))
                })
                .collect::<Result<_>>()?,
            Some(other) => return Err(Error::param(key, format!("expected a list of strings, got {other}"))),
        };
        self.record(key, v.clone());
        Ok(Some(v))
    }

    fn list_or(&mut self, key: &str, default: Vec<String>) -> Result<Vec<String>> {
        match self.list_opt(key)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, default.clone());
                Ok(default)
            }
        }
    }

    fn seed(&mut self) -> Result<u64> {
        self.u64_or("seed", 0)
    }

    fn binning(&mut self) -> Result<Binning> {
        match self.raw("binning") {
            Some(v) => {
                let b: Binning = serde_json::from_value(v.clone()).map_err(|e| Error::param("binning", e.to_string()))?;
                self.record("binning", v.clone());
                Ok(b)
            }
            None => {
                let b = Binning::default();
                self.record("binning", serde_json::to_value(&b)?);
                Ok(b)
            }
        }
    }

    fn enum_param<T: serde::de::DeserializeOwned>(&mut self, key: &str, default: &str) -> Result<T> {
        let s = self.str_or(key, default)?;
        serde_json::from_value(Json::String(s.to_ascii_lowercase())).map_err(|_| Error::param(key, format!("unknown value `{s}`")))
    }

    /// A column checked against the card's supported variable types.
    fn column(&self, name: &str) -> Result<&'a Column> {
        let col = self.ds.column(name)?;
        let vt = match col.spec().vtype {
            VarType::Numerical => Some(CardVarType::Numerical),
            VarType::Categorical => Some(CardVarType::Categorical),
            VarType::Ordinal => Some(CardVarType::Ordinal),
            VarType::Datetime | VarType::Identifier => None,
        };
        if vt.is_none_or(|v| !self.card.applicability.variable_types.contains(&v)) {
            return Err(Error::NotApplicable {
                metric: self.card.id.clone(),
                reason: format!(
                    "column `{name}` is {}, metric supports {}",
                    col.spec().vtype,
                    self.card
                        .applicability
                        .variable_types
                        .iter()
                        .map(|v| v.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            });
        }
        Ok(col)
    }

    /// Column named by `key`, or the column carrying `role`.
    fn role_column(&mut self, key: &str, role: Role) -> Result<String> {
        if let Some(c) = self.str_opt(key)? {
            return Ok(c);
        }
        let c = self
            .ds
            .column_with_role(role)
            .ok_or_else(|| Error::MissingParameter(format!("{key} (no column has the {role} role)")))?;
        let name = c.name().to_string();
        self.record(key, name.clone());
        Ok(name)
    }

    fn raters(&mut self, min: usize) -> Result<Vec<String>> {
        let default: Vec<String> = self.ds.columns_with_role(Role::Annotation).map(|c| c.name().to_string()).collect();
        let raters = self.list_or("raters", default)?;
        if raters.len() < min {
            return Err(Error::Prerequisite {
                metric: self.card.id.clone(),
                reason: format!("multiple raters required (found {})", raters.len()),
            });
        }
        for r in &raters {
            self.column(r)?;
        }
        Ok(raters)
    }

    fn sample(&self, name: &str) -> Result<Sample> {
        self.column(name)?;
        self.ds.column_sample(name)
    }

    fn numeric(&self, name: &str) -> Result<Vec<Option<f64>>> {
        self.column(name)?;
        self.ds.numeric_column(name)
    }

    fn pair(&mut self, ka: &str, kb: &str) -> Result<(Vec<f64>, Vec<f64>, Scope)> {
        let a = self.str_req(ka)?;
        let b = self.str_req(kb)?;
        let (x, y, dropped) = pairwise_complete(&self.numeric(&a)?, &self.numeric(&b)?)?;
        if dropped > 0 {
            self.warnings.push(format!("{dropped} incomplete pairs dropped"));
        }
        Ok((x, y, Scope::new(ScopeTarget::Pair { a, b })))
    }

    /// Record groups of `by` to compare: the requested ones or the two largest.
    fn comparison_groups(&mut self, by: &str, k_all: bool) -> Result<Vec<(String, Vec<usize>)>> {
        let groups = self.ds.group_by(by)?;
        if !groups.missing.is_empty() {
            self.warnings
                .push(format!("{} records with missing `{by}` excluded", groups.missing.len()));
        }
        let chosen: Vec<(String, Vec<usize>)> = match self.list_opt("groups")? {
            Some(names) => names
                .into_iter()
                .map(|g| {
                    let rows = groups
                        .groups
                        .get(&g)
                        .cloned()
                        .ok_or_else(|| Error::param("groups", format!("no group `{g}` in `{by}`")))?;
                    Ok((g, rows))
                })
                .collect::<Result<_>>()?,
            None => {
                let mut all: Vec<(String, Vec<usize>)> = groups.groups.into_iter().collect();
                if !k_all {
                    all.sort_by(|a, b| b.1.len().cmp(&a.1.len()));
                    all.truncate(2);
                }
                self.record("groups", all.iter().map(|(g, _)| g.clone()).collect::<Vec<_>>());
                all
            }
        };
        let need_two = !k_all && chosen.len() != 2;
        if chosen.len() < 2 || need_two {
            return Err(Error::InvalidInput(format!(
                "comparison needs {} groups in `{by}`, found {}",
                if k_all { "at least 2" } else { "exactly 2" },
                chosen.len()
            )));
        }
        Ok(chosen)
    }

    /// Numerical samples to compare: two columns, or one column split by groups.
    fn samples(&mut self, k_all: bool) -> Result<(Vec<Sample>, Scope)> {
        if let Some(cols) = self.list_opt("columns")? {
            if cols.len() < 2 || (!k_all && cols.len() != 2) {
                return Err(Error::param("columns", "wrong number of columns to compare"));
            }
            let s = cols.iter().map(|c| self.sample(c)).collect::<Result<Vec<_>>>()?;
            let scope = if cols.len() == 2 {
                ScopeTarget::Pair { a: cols[0].clone(), b: cols[1].clone() }
            } else {
                ScopeTarget::Columns { names: cols }
            };
            return Ok((s, Scope::new(scope)));
        }
        let column = self.str_req("column")?;
        let by = self.str_req("group_by")?;
        let raw = self.numeric(&column)?;
        let chosen = self.comparison_groups(&by, k_all)?;
        let mut out = Vec::new();
        for (_, rows) in &chosen {
            let vals: Vec<f64> = rows.iter().filter_map(|&r| raw[r]).collect();
            out.push(Sample::with_dropped(vals.clone(), rows.len() - vals.len()));
        }
        let scope = ScopeTarget::Groups { column, by, groups: chosen.into_iter().map(|(g, _)| g).collect() };
        Ok((out, Scope::new(scope)))
    }

    fn two_samples(&mut self) -> Result<(Sample, Sample, Scope)> {
        let (mut s, scope) = self.samples(false)?;
        let b = s.pop().expect("two samples");
        let a = s.pop().expect("two samples");
        Ok((a, b, scope))
    }

    fn is_categorical_input(&mut self) -> Result<bool> {
        let first = match self.raw("columns") {
            Some(Json::Array(a)) => a.first().and_then(Json::as_str).map(str::to_string),
            _ => self.raw("column").and_then(Json::as_str).map(str::to_string),
        };
        let first = first.ok_or_else(|| Error::MissingParameter("column".into()))?;
        Ok(matches!(self.ds.column(&first)?.spec().vtype, VarType::Categorical))
    }

    fn two_counts(&mut self) -> Result<(CategoricalCounts, CategoricalCounts, Scope)> {
        if let Some(cols) = self.list_opt("columns")? {
            if cols.len() != 2 {
                return Err(Error::param("columns", "exactly two columns are compared"));
            }
            self.column(&cols[0])?;
            self.column(&cols[1])?;
            let a = self.ds.categorical_counts(&cols[0])?;
            let b = self.ds.categorical_counts(&cols[1])?;
            let scope = Scope::new(ScopeTarget::Pair { a: cols[0].clone(), b: cols[1].clone() });
            return Ok((a, b, scope));
        }
        let column = self.str_req("column")?;
        self.column(&column)?;
        let by = self.str_req("group_by")?;
        let values = self.ds.text_column(&column)?;
        let chosen = self.comparison_groups(&by, false)?;
        let counts = |rows: &[usize]| {
            let mut c = CategoricalCounts::new();
            for &r in rows {
                if let Some(v) = &values[r] {
                    c.add(v.clone(), 1);
                }
            }
            c
        };
        let (a, b) = (counts(&chosen[0].1), counts(&chosen[1].1));
        let scope = ScopeTarget::Groups { column, by, groups: chosen.into_iter().map(|(g, _)| g).collect() };
        Ok((a, b, Scope::new(scope)))
    }

    /// Embedding sets from files, or from feature columns split by groups.
    fn embeddings(&mut self) -> Result<(EmbeddingSet, EmbeddingSet, Scope)> {
        if let (Some(pa), Some(pb)) = (self.str_opt("embeddings_a")?, self.str_opt("embeddings_b")?) {
            let a = EmbeddingSet::load(Path::new(&pa))?;
            let b = EmbeddingSet::load(Path::new(&pb))?;
            return Ok((a, b, Scope::new(ScopeTarget::Pair { a: pa, b: pb })));
        }
        let features = self
            .list_opt("features")?
            .ok_or_else(|| Error::MissingParameter("features (or embeddings_a and embeddings_b)".into()))?;
        let by = self.str_req("group_by")?;
        let cols = features.iter().map(|f| self.numeric(f)).collect::<Result<Vec<_>>>()?;
        let chosen = self.comparison_groups(&by, false)?;
        let build = |rows: &[usize]| {
            let vecs: Vec<Vec<f64>> = rows
                .iter()
                .filter_map(|&r| cols.iter().map(|c| c[r]).collect::<Option<Vec<f64>>>())
                .collect();
            EmbeddingSet::from_rows(&vecs)
        };
        let a = build(&chosen[0].1)?;
        let b = build(&chosen[1].1)?;
        let scope = ScopeTarget::Groups {
            column: features.join("+"),
            by,
            groups: chosen.into_iter().map(|(g, _)| g).collect(),
        };
        Ok((a, b, Scope::new(scope)))
    }

    fn smoothing(&mut self) -> Result<Smoothing> {
        let mode = self.str_or("smoothing", "epsilon")?;
        match mode.as_str() {
            "strict" => Ok(Smoothing::Strict),
            "epsilon" => Ok(Smoothing::Epsilon { epsilon: self.f64_or("epsilon", crate::distribution::divergence::DEFAULT_EPSILON)? }),
            other => Err(Error::param("smoothing", format!("unknown mode `{other}`"))),
        }
    }

    fn evaluation_time(&mut self) -> Result<i64> {
        match self.raw("evaluation_time") {
            None => Err(Error::MissingParameter("evaluation_time".into())),
            Some(Json::String(s)) => {
                let t = parse_timestamp(s).ok_or_else(|| Error::param("evaluation_time", format!("unparseable `{s}`")))?;
                self.record("evaluation_time", s.clone());
                Ok(t)
            }
            Some(v) => {
                let t = v.as_i64().ok_or_else(|| Error::param("evaluation_time", "expected seconds or a timestamp"))?;
                self.record("evaluation_time", t);
                Ok(t)
            }
        }
    }
}

fn test_value(t: TestOutcome, warnings: &mut Vec<String>) -> MetricValue {
    warnings.extend(t.warnings);
    let mut m = vec![
        ("statistic", MetricValue::scalar(t.statistic)),
        ("p_value", MetricValue::optional(t.p_value)),
    ];
    if let Some(df) = t.df {
        m.push(("df", MetricValue::scalar(df)));
    }
    MetricValue::map(m)
}

fn global() -> Scope {
    Scope::new(ScopeTarget::Global)
}

fn column_scope(name: &str) -> Scope {
    Scope::new(ScopeTarget::Column { name: name.to_string() })
}

fn truthy(v: &Option<crate::data::Value>) -> Option<bool> {
    use crate::data::Value;
    match v.as_ref()? {
        Value::Number(x) => Some(*x != 0.0),
        Value::Time(t) => Some(*t != 0),
        Value::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
            "1" | "true" | "yes" | "y" | "t" => Some(true),
            "0" | "false" | "no" | "n" | "f" => Some(false),
            _ => None,
        },
    }
}

/// Per-label counts of a multi-label column whose cells join labels with `sep`.
fn label_counts(cells: &[Option<String>], sep: &str) -> CategoricalCounts {
    let mut c = CategoricalCounts::new();
    for cell in cells.iter().flatten() {
        for l in cell.split(sep).map(str::trim).filter(|l| !l.is_empty()) {
            c.add(l, 1);
        }
    }
    c
}

/// Numeric view of a correlation operand; categorical columns become an
/// indicator of `positive_class`.
fn operand(a: &mut Args, key: &str, name: &str) -> Result<Vec<Option<f64>>> {
    let col = a.ds.column(name)?;
    if col.spec().vtype == VarType::Categorical && a.card.applicability.variable_types.contains(&CardVarType::Numerical) {
        let pos_key = format!("{key}_positive_class");
        let pos = a.str_opt(&pos_key)?.ok_or_else(|| Error::NotApplicable {
            metric: a.card.id.clone(),
            reason: format!("column `{name}` is categorical; set `{pos_key}` to correlate its indicator"),
        })?;
        let sep = a.str_opt("separator")?;
        let hit = |k: String| match &sep {
            Some(sep) => k.split(sep.as_str()).any(|l| l.trim() == pos),
            None => k == pos,
        };
        return Ok(col.cells().iter().map(|c| c.as_ref().map(|v| if hit(v.key()) { 1.0 } else { 0.0 })).collect());
    }
    a.numeric(name)
}

fn correlation_metric(a: &mut Args, kind: CorrelationKind) -> Result<(MetricValue, Scope)> {
    let x = a.str_req("x")?;
    let y = a.role_column("y", Role::Target)?;
    let xs = operand(a, "x", &x)?;
    let ys = operand(a, "y", &y)?;
    let (xv, yv, dropped) = pairwise_complete(&xs, &ys)?;
    if dropped > 0 {
        a.warnings.push(format!("{dropped} incomplete pairs dropped"));
    }
    let r = correlation(kind, &xv, &yv)?;
    Ok((MetricValue::scalar(r), Scope::new(ScopeTarget::Pair { a: x, b: y })))
}

fn currency_metric(a: &mut Args, model: CurrencyModel) -> Result<(MetricValue, Scope)> {
    let col = a.role_column("timestamp", Role::Timestamp)?;
    let now = a.evaluation_time()?;
    let ts = a.ds.numeric_column(&col)?;
    let vals = ts
        .iter()
        .flatten()
        .map(|&t| currency(t as i64, now, model))
        .collect::<Result<Vec<_>>>()?;
    if vals.is_empty() {
        return Err(Error::Empty(format!("no timestamps in `{col}`")));
    }
    let missing = ts.len() - vals.len();
    if missing > 0 {
        a.warnings.push(format!("{missing} records without timestamp excluded"));
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((
        MetricValue::map([
            ("mean", MetricValue::scalar(mean)),
            ("min", MetricValue::scalar(min)),
            ("max", MetricValue::scalar(max)),
            ("records", MetricValue::scalar(vals.len() as f64)),
        ]),
        column_scope(&col),
    ))
}

fn entropy_metric(a: &mut Args) -> Result<(MetricValue, Scope)> {
    let has_column = a.raw("column").is_some();
    let default_variant = if !has_column && a.ds.signals().is_some() { "sample" } else { "shannon" };
    let variant = a.str_or("variant", default_variant)?;
    match variant.as_str() {
        "shannon" => {
            let column = a.str_req("column")?;
            let base = a.f64_or("base", std::f64::consts::E)?;
            let col = a.column(&column)?;
            let counts = if col.spec().vtype == VarType::Numerical {
                let b = a.binning()?;
                crate::data::histogram(&a.ds.column_sample(&column)?, &b)?.counts
            } else {
                a.ds.categorical_counts(&column)?
            };
            Ok((MetricValue::scalar(shannon_entropy(&counts, base)?), column_scope(&column)))
        }
        "sample" => {
            let p = SampleEntropyParams {
                m: a.u64_or("m", SampleEntropyParams::default().m as u64)? as usize,
                r: a.f64_or("r", SampleEntropyParams::default().r)?,
            };
            if has_column {
                let column = a.str_req("column")?;
                let s = a.sample(&column)?;
                let f = sample_entropy(s.values(), p)?;
                a.warnings.extend(f.warnings);
                return Ok((MetricValue::optional(f.value), column_scope(&column)));
            }
            signal_entropy(a, p)
        }
        other => Err(Error::param("variant", format!("unknown entropy variant `{other}`"))),
    }
}

/// Mean over records of the channel-averaged sample entropy.
fn signal_entropy(a: &mut Args, p: SampleEntropyParams) -> Result<(MetricValue, Scope)> {
    let store = a.ds.signals().ok_or_else(|| Error::InvalidInput("dataset has no signals".into()))?;
    let n = store.len();
    let max_records = a.u64_opt("max_records")?.map(|m| m as usize).unwrap_or(n).max(1);
    let stride = n.div_ceil(max_records).max(1);
    let channels = a.list_opt("channels")?;
    let records: Vec<usize> = (0..n).step_by(stride).filter(|&i| store.has_signal(i)).collect();
    let per_record: Vec<Result<(Option<f64>, usize)>> = records
        .par_iter()
        .map(|&i| {
            let block = store.get(i)?.expect("record has a signal");
            let mut vals = Vec::new();
            let mut undefined = 0;
            for (name, ch) in block.channel_names().iter().zip(block.channels()) {
                if channels.as_ref().is_some_and(|c| !c.contains(name)) {
                    continue;
                }
                match sample_entropy(ch, p)?.value {
                    Some(v) => vals.push(v),
                    None => undefined += 1,
                }
            }
            let mean = (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
            Ok((mean, undefined))
        })
        .collect();
    let mut values = Vec::new();
    let mut undefined = 0;
    for r in per_record {
        let (m, u) = r?;
        undefined += u;
        values.extend(m);
    }
    if undefined > 0 {
        a.warnings.push(format!("sample entropy undefined for {undefined} channels (no matches)"));
    }
    if values.is_empty() {
        return Err(Error::Empty("no record with a defined sample entropy".into()));
    }
    let s = Sample::new(values.clone());
    let st = summary_stats(&s)?;
    Ok((
        MetricValue::map([
            ("mean", MetricValue::scalar(st.mean)),
            ("sd", MetricValue::optional(st.std)),
            ("records", MetricValue::scalar(values.len() as f64)),
        ]),
        Scope::new(ScopeTarget::Signals),
    ))
}

fn completeness_metric(a: &mut Args) -> Result<(MetricValue, Scope)> {
    let target = a.str_or("target", "table")?;
    match target.as_str() {
        "signals" => Ok((MetricValue::scalar(signal_completeness(a.ds)?), Scope::new(ScopeTarget::Signals))),
        "table" => {
            let cols = a.list_opt("columns")?;
            let (_, total) = match &cols {
                Some(c) => (0, c.len() * a.ds.n_records()),
                None => a.ds.cell_counts(),
            };
            let scope = match &cols {
                Some(c) => Scope::new(ScopeTarget::Columns { names: c.clone() }),
                None => global(),
            };
            if total == 0 {
                a.warnings.push("no cells in scope: vacuously complete".into());
                return Ok((MetricValue::scalar(1.0), scope));
            }
            Ok((MetricValue::scalar(completeness(a.ds, cols.as_deref())?), scope))
        }
        other => Err(Error::param("target", format!("expected `table` or `signals`, got `{other}`"))),
    }
}

fn agreement_ratings(a: &mut Args, min: usize) -> Result<(RatingsMatrix, Scope)> {
    let raters = a.raters(min)?;
    let m = RatingsMatrix::from_dataset(a.ds, &raters)?;
    Ok((m, Scope::new(ScopeTarget::Columns { names: raters })))
}

fn dispatch(id: &str, a: &mut Args) -> Result<(MetricValue, Scope)> {
    let ds = a.ds;
    match id {
        "entropy" => entropy_metric(a),
        "limit_of_detection" | "limit_of_quantification" => {
            let column = a.str_req("column")?;
            let k_lod = a.f64_or("k_lod", 3.0)?;
            let k_loq = a.f64_or("k_loq", 10.0)?;
            let s = a.sample(&column)?;
            let f = lod_loq(s.values(), k_lod, k_loq)?;
            a.warnings.extend(f.warnings);
            let v = if id == "limit_of_detection" { f.value.lod } else { f.value.loq };
            Ok((MetricValue::scalar(v), column_scope(&column)))
        }
        "systematic_error" | "random_error" => {
            let (x, y, scope) = a.pair("measured", "reference")?;
            let e = instrument_error(&x, &y)?;
            Ok((MetricValue::scalar(if id == "systematic_error" { e.systematic } else { e.random }), scope))
        }
        "bland_altman_cr" => {
            let (x, y, scope) = a.pair("a", "b")?;
            let pairs: Vec<(f64, f64)> = x.into_iter().zip(y).collect();
            Ok((MetricValue::scalar(bland_altman_cr(&pairs)?), scope))
        }
        "repeatability_cv" | "reproducibility_variance" => {
            let value = a.str_req("value")?;
            let key = if id == "repeatability_cv" { "subject" } else { "condition" };
            let by = a.str_req(key)?;
            let vals = a.numeric(&value)?;
            let labels = ds.text_column(&by)?;
            let rm = RepeatedMeasures::from_pairs(
                labels.into_iter().zip(vals).filter_map(|(l, v)| Some((l?, v?))),
            );
            let scope = Scope::new(ScopeTarget::Pair { a: value, b: by });
            if id == "repeatability_cv" {
                let f = repeatability_cv(&rm)?;
                a.warnings.extend(f.warnings);
                Ok((MetricValue::scalar(f.value), scope))
            } else {
                let f = reproducibility_variance(&rm)?;
                a.warnings.extend(f.warnings);
                let c = f.value;
                Ok((
                    MetricValue::map([
                        ("value", MetricValue::scalar(c.reproducibility)),
                        ("repeatability", MetricValue::scalar(c.repeatability)),
                        ("between", MetricValue::scalar(c.between)),
                    ]),
                    scope,
                ))
            }
        }
        "cohens_kappa" => {
            let (m, scope) = agreement_ratings(a, 2)?;
            if m.n_raters() != 2 {
                return Err(Error::Prerequisite {
                    metric: id.into(),
                    reason: format!("exactly two raters required (found {})", m.n_raters()),
                });
            }
            let weights: KappaWeights = a.enum_param("weights", "none")?;
            let f = cohens_kappa(&m, weights)?;
            a.warnings.extend(f.warnings);
            Ok((MetricValue::scalar(f.value), scope))
        }
        "fleiss_kappa" => {
            let (m, scope) = agreement_ratings(a, 2)?;
            Ok((MetricValue::scalar(fleiss_kappa(&m)?), scope))
        }
        "kendalls_w" => {
            let (m, scope) = agreement_ratings(a, 2)?;
            Ok((MetricValue::scalar(kendalls_w(&m)?), scope))
        }
        "krippendorff_alpha" => {
            let (m, scope) = agreement_ratings(a, 2)?;
            let default = match m.scale() {
                crate::data::RatingScale::Nominal => "nominal",
                crate::data::RatingScale::Ordinal => "ordinal",
                crate::data::RatingScale::Interval => "interval",
            };
            let level: AlphaLevel = a.enum_param("level", default)?;
            Ok((MetricValue::scalar(krippendorff_alpha(&m, level)?), scope))
        }
        "dice_score" | "iou" => {
            let ca = a.str_req("a")?;
            let cb = a.str_req("b")?;
            let (xa, xb) = (a.column(&ca)?, a.column(&cb)?);
            let (mut ma, mut mb) = (Vec::new(), Vec::new());
            for (x, y) in xa.cells().iter().zip(xb.cells()) {
                if let (Some(x), Some(y)) = (truthy(x), truthy(y)) {
                    ma.push(x);
                    mb.push(y);
                }
            }
            let kind = if id == "dice_score" { OverlapKind::Dice } else { OverlapKind::Iou };
            let f = overlap(&ma, &mb, kind)?;
            a.warnings.extend(f.warnings);
            Ok((MetricValue::scalar(f.value), Scope::new(ScopeTarget::Pair { a: ca, b: cb })))
        }
        "completeness" => completeness_metric(a),
        "patient_level_completeness" => {
            let patient = a.role_column("patient", Role::PatientId)?;
            let default = if ds.signals().is_some() { Some("signals") } else { None };
            let var = match default {
                Some(d) => a.str_or("variable", d)?,
                None => a.str_req("variable")?,
            };
            let (variable, scope) = if var == "signals" {
                (PatientVariable::Signal, Scope::new(ScopeTarget::Signals))
            } else {
                (PatientVariable::Column(var.clone()), column_scope(&var))
            };
            Ok((MetricValue::scalar(patient_level_completeness(ds, Some(&patient), &variable)?), scope))
        }
        "record_completeness" => {
            let all: Vec<String> = ds.columns().iter().map(|c| c.name().to_string()).collect();
            let req = a.list_or("required", all)?;
            let f = record_completeness(ds, &req)?;
            a.warnings.extend(f.warnings);
            Ok((MetricValue::scalar(f.value), Scope::new(ScopeTarget::Columns { names: req })))
        }
        "syntactic_accuracy" => {
            let column = a.str_req("column")?;
            a.column(&column)?;
            let dict: BTreeSet<String> = a
                .list_opt("dictionary")?
                .ok_or_else(|| Error::MissingParameter("dictionary".into()))?
                .into_iter()
                .collect();
            let v = syntactic_accuracy(&ds.text_column(&column)?, &dict)?;
            Ok((MetricValue::scalar(v), column_scope(&column)))
        }
        "page_hinkley" => {
            let column = a.str_req("column")?;
            let d = PageHinkleyParams::default();
            let p = PageHinkleyParams {
                delta: a.f64_or("delta", d.delta)?,
                lambda: a.f64_or("lambda", d.lambda)?,
                direction: a.enum_param("direction", "increase")?,
            };
            let raw = a.numeric(&column)?;
            let mut idx: Vec<usize> = (0..raw.len()).filter(|&i| raw[i].is_some()).collect();
            if let Some(order) = a.str_opt("order_by")? {
                let key = ds.numeric_column(&order)?;
                idx.retain(|&i| key[i].is_some());
                idx.sort_by(|&i, &j| key[i].unwrap().total_cmp(&key[j].unwrap()));
            }
            let series: Vec<f64> = idx.iter().map(|&i| raw[i].unwrap()).collect();
            let out = page_hinkley(&series, p)?;
            let first = out.alarm_indices.first().map(|&t| t as f64);
            Ok((
                MetricValue::map([
                    ("statistic", MetricValue::scalar(out.max_statistic)),
                    ("alarms", MetricValue::scalar(out.alarm_indices.len() as f64)),
                    ("first_alarm", MetricValue::optional(first)),
                ]),
                column_scope(&column),
            ))
        }
        "dataset_size" => Ok((MetricValue::scalar(dataset_size(ds) as f64), global())),
        "granularity" => {
            let roles = match a.list_opt("roles")? {
                None => {
                    a.record("roles", vec!["feature"]);
                    vec![Role::Feature]
                }
                Some(r) => r
                    .iter()
                    .map(|x| serde_json::from_value(Json::String(x.clone())).map_err(|_| Error::param("roles", format!("unknown role `{x}`"))))
                    .collect::<Result<Vec<Role>>>()?,
            };
            let f = granularity_of(ds, &roles);
            a.warnings.extend(f.warnings);
            Ok((MetricValue::scalar(f.value as f64), global()))
        }
        "sampling_frequency" => {
            let f = sampling_frequency(ds)?;
            a.warnings.extend(f.warnings);
            let v = match f.value.as_slice() {
                [one] => MetricValue::scalar(*one),
                many => MetricValue::vector(many),
            };
            Ok((v, Scope::new(ScopeTarget::Signals)))
        }
        "resolution" => {
            let w = a.str_or("width", "width")?;
            let h = a.str_or("height", "height")?;
            let (ws, hs, dropped) = pairwise_complete(&a.numeric(&w)?, &a.numeric(&h)?)?;
            if dropped > 0 {
                a.warnings.push(format!("{dropped} images without size excluded"));
            }
            let sizes: Vec<(f64, f64)> = ws.into_iter().zip(hs).collect();
            let r = resolution(&sizes)?;
            Ok((
                MetricValue::map([
                    ("min_width", MetricValue::scalar(r.min_width)),
                    ("min_height", MetricValue::scalar(r.min_height)),
                    ("median_width", MetricValue::scalar(r.median_width)),
                    ("median_height", MetricValue::scalar(r.median_height)),
                    ("count", MetricValue::scalar(r.n_images as f64)),
                ]),
                Scope::new(ScopeTarget::Pair { a: w, b: h }),
            ))
        }
        "label_granularity" => {
            let label = a.str_or("label", "label")?;
            let parent = a.str_or("parent", "parent")?;
            a.column(&label)?;
            let labels = ds.text_column(&label)?;
            let parents = ds.text_column(&parent)?;
            let mut tree: IndexMap<String, Option<String>> = IndexMap::new();
            for (l, p) in labels.into_iter().zip(parents) {
                if let Some(l) = l {
                    tree.entry(l).or_insert(p);
                }
            }
            Ok((
                MetricValue::scalar(label_granularity(&tree)? as f64),
                Scope::new(ScopeTarget::Pair { a: label, b: parent }),
            ))
        }
        "imbalance_ratio" | "imbalance_degree" | "lrid" => {
            let column = a.role_column("column", Role::Target)?;
            a.column(&column)?;
            let c = match a.str_opt("separator")? {
                Some(sep) => label_counts(&ds.text_column(&column)?, &sep),
                None => ds.categorical_counts(&column)?,
            };
            let v = match id {
                "imbalance_ratio" => {
                    let f = imbalance_ratio(&c)?;
                    a.warnings.extend(f.warnings);
                    f.value
                }
                "imbalance_degree" => imbalance_degree(&c, a.enum_param("distance", "total_variation")?)?,
                _ => lrid(&c)?,
            };
            Ok((MetricValue::scalar(v), column_scope(&column)))
        }
        "currency_ballou" => {
            let m = CurrencyModel::Ballou { volatility: a.f64_req("volatility")?, s: a.f64_or("s", 1.0)? };
            currency_metric(a, m)
        }
        "currency_li" => {
            let m = CurrencyModel::Li { shelf_life: a.f64_req("shelf_life")? };
            currency_metric(a, m)
        }
        "currency_hinrichs" => {
            let m = CurrencyModel::Hinrichs { update_rate: a.f64_req("update_rate")? };
            currency_metric(a, m)
        }
        "currency_heinrich" => {
            let m = CurrencyModel::Heinrich { decline: a.f64_or("decline", 1e-9)? };
            currency_metric(a, m)
        }
        "prevalence_of_duplicates" => {
            let keys = a.list_opt("keys")?;
            let d = prevalence_of_duplicates(ds, keys.as_deref())?;
            let scope = match keys {
                Some(k) => Scope::new(ScopeTarget::Columns { names: k }),
                None => global(),
            };
            Ok((
                MetricValue::map([
                    ("count", MetricValue::scalar(d.count as f64)),
                    ("ratio", MetricValue::scalar(d.ratio)),
                ]),
                scope,
            ))
        }
        "effective_sample_size" => {
            let input = match a.str_opt("weights")? {
                Some(w) => EssInput::Weights { weights: a.ds.column_sample(&w)?.values().to_vec() },
                None => EssInput::Cluster {
                    n: a.f64_or("n", ds.n_records() as f64)?,
                    cluster_size: a.f64_req("cluster_size")?,
                    icc: a.f64_req("icc")?,
                },
            };
            Ok((MetricValue::scalar(effective_sample_size(&input)?), global()))
        }
        "littles_test" => {
            let default: Vec<String> = ds
                .columns()
                .iter()
                .filter(|c| c.spec().vtype == VarType::Numerical && c.spec().role == Role::Feature)
                .map(|c| c.name().to_string())
                .collect();
            let cols = a.list_or("columns", default)?;
            let data = cols.iter().map(|c| a.numeric(c)).collect::<Result<Vec<_>>>()?;
            let t = littles_mcar_test(&data)?;
            Ok((test_value(t, &mut a.warnings), Scope::new(ScopeTarget::Columns { names: cols })))
        }
        "informative_dropout" => informative_dropout().map(|_| unreachable!("stub never succeeds")),
        "range" | "interquartile_range" | "mean_sd" => {
            let column = a.str_req("column")?;
            let s = a.sample(&column)?;
            if s.dropped() > 0 {
                a.warnings.push(format!("{} missing values dropped", s.dropped()));
            }
            let st = summary_stats(&s)?;
            let v = match id {
                "range" => MetricValue::scalar(st.range),
                "interquartile_range" => MetricValue::scalar(st.iqr),
                _ => MetricValue::map([("mean", MetricValue::scalar(st.mean)), ("sd", MetricValue::optional(st.std))]),
            };
            Ok((v, column_scope(&column)))
        }
        "hill_number" => {
            let column = a.str_req("column")?;
            a.column(&column)?;
            let q = a.f64_or("q", 2.0)?;
            Ok((MetricValue::scalar(hill_number(&ds.categorical_counts(&column)?, q)?), column_scope(&column)))
        }
        "mmd" | "kid" | "fid" => {
            let use_embeddings = id != "mmd" || a.raw("features").is_some() || a.raw("embeddings_a").is_some();
            let (ea, eb, scope) = if use_embeddings {
                a.embeddings()?
            } else {
                let (sa, sb, scope) = a.two_samples()?;
                (EmbeddingSet::from_values(sa.values())?, EmbeddingSet::from_values(sb.values())?, scope)
            };
            let v = match id {
                "fid" => {
                    let o = frechet_gaussian(&ea, &eb)?;
                    a.warnings.extend(o.warnings);
                    o.value
                }
                _ => {
                    let max_n = a.u64_or("max_n", KERNEL_MAX_N)? as usize;
                    let seed = a.seed()?;
                    if ea.n() > max_n || eb.n() > max_n {
                        a.warnings.push(format!("parameter_choice: subsampled to at most {max_n} vectors per side"));
                    }
                    let (ea, eb) = (ea.subsample(max_n, seed), eb.subsample(max_n, seed.wrapping_add(1)));
                    let o = if id == "kid" {
                        let degree = a.u64_or("degree", 3)? as u32;
                        let coef = a.f64_or("coef", 1.0)?;
                        kid(&ea, &eb, degree, coef)?
                    } else {
                        let kernel = match a.str_or("kernel", "rbf")?.as_str() {
                            "rbf" => Kernel::Rbf { bandwidth: a.f64_opt("bandwidth")? },
                            "polynomial" => Kernel::Polynomial {
                                degree: a.u64_or("degree", 3)? as u32,
                                coef: a.f64_or("coef", 1.0)?,
                            },
                            other => return Err(Error::param("kernel", format!("unknown kernel `{other}`"))),
                        };
                        mmd(&ea, &eb, kernel)?
                    };
                    if let Some(bw) = o.bandwidth {
                        a.record("bandwidth_used", bw);
                    }
                    a.warnings.extend(o.warnings);
                    o.value
                }
            };
            Ok((MetricValue::scalar(v), scope))
        }
        "cohens_d" | "energy_distance" | "wasserstein" => {
            let (sa, sb, scope) = a.two_samples()?;
            let v = match id {
                "cohens_d" => cohens_d(&sa, &sb)?,
                "energy_distance" => energy_distance(&sa, &sb)?,
                _ => wasserstein_1d(&sa, &sb, a.f64_or("order", 1.0)?)?,
            };
            Ok((MetricValue::scalar(v), scope))
        }
        "kl_divergence" | "js_divergence" | "psi" => {
            let kind = match id {
                "kl_divergence" => DivergenceKind::Kl,
                "js_divergence" => DivergenceKind::Js,
                _ => DivergenceKind::Psi,
            };
            let smoothing = a.smoothing()?;
            let (out, scope) = if a.is_categorical_input()? {
                let (ca, cb, scope) = a.two_counts()?;
                (divergence_counts(kind, &ca, &cb, smoothing)?, scope)
            } else {
                let (sa, sb, scope) = a.two_samples()?;
                let binning = a.binning()?;
                let (out, edges) = divergence_samples(kind, &sa, &sb, &binning, smoothing)?;
                a.record("edges", edges);
                (out, scope)
            };
            a.warnings.extend(out.warnings);
            Ok((MetricValue::scalar(out.value), scope))
        }
        "ks_test" | "epps_singleton" | "mann_whitney_u" => {
            let (sa, sb, scope) = a.two_samples()?;
            let t = match id {
                "ks_test" => ks_2samp(&sa, &sb)?,
                "epps_singleton" => epps_singleton(&sa, &sb)?,
                _ => mann_whitney_u(&sa, &sb)?,
            };
            Ok((test_value(t, &mut a.warnings), scope))
        }
        "anderson_darling" => {
            let (s, scope) = a.samples(true)?;
            let refs: Vec<&Sample> = s.iter().collect();
            let t = anderson_darling_k(&refs)?;
            Ok((test_value(t, &mut a.warnings), scope))
        }
        "chi_squared" => {
            let (ca, cb, scope) = a.two_counts()?;
            let t = chi_squared(&ca, &cb)?;
            Ok((test_value(t, &mut a.warnings), scope))
        }
        "pearson" => correlation_metric(a, CorrelationKind::Pearson),
        "spearman" => correlation_metric(a, CorrelationKind::Spearman),
        "kendall_tau" => correlation_metric(a, CorrelationKind::KendallTau),
        "goodman_kruskal_gamma" => correlation_metric(a, CorrelationKind::GoodmanKruskalGamma),
        "concordance_cc" => {
            let (x, y, scope) = a.pair("x", "y")?;
            Ok((MetricValue::scalar(concordance_cc(&x, &y)?), scope))
        }
        "icc" => {
            let raters = a.raters(2)?;
            let m = RatingsMatrix::from_dataset(ds, &raters)?;
            let o = icc(&m)?;
            if o.items_dropped > 0 {
                a.warnings.push(format!("{} items with missing ratings dropped", o.items_dropped));
            }
            Ok((MetricValue::scalar(o.value), Scope::new(ScopeTarget::Columns { names: raters })))
        }
        "cramers_v" => {
            let ca = a.str_req("a")?;
            let cb = a.role_column("b", Role::Target)?;
            a.column(&ca)?;
            a.column(&cb)?;
            let (_, _, table) = contingency(&ds.text_column(&ca)?, &ds.text_column(&cb)?)?;
            Ok((MetricValue::scalar(cramers_v(&table)?), Scope::new(ScopeTarget::Pair { a: ca, b: cb })))
        }
        other => Err(Error::NotImplemented(format!("no evaluator for `{other}`"))),
    }
}

/// Compute metric `id` on `ds`. Every parameter consulted, defaults
/// included, is echoed in the result.
pub fn evaluate(id: &str, ds: &Dataset, params: &ParamMap) -> Result<MetricResult> {
    let card = card(id)?;
    let mut args = Args { input: params, used: BTreeMap::new(), card, ds, warnings: Vec::new() };
    let (value, scope) = dispatch(&card.id, &mut args)?;
    Ok(MetricResult {
        metric_id: card.id.clone(),
        scope,
        params: args.used,
        value,
        warnings: args.warnings,
    })
}

/// Parameters as a JSON object, for callers building them inline.
pub fn params(v: Json) -> ParamMap {
    match v {
        Json::Object(m) => m,
        Json::Null => ParamMap::new(),
        other => {
            let mut m = ParamMap::new();
            m.insert("value".into(), other);
            m
        }
    }
}
