use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use dq_cli::descriptor::{load, schema_mismatch, LoadedDataset};
use dq_cli::harness::{run_harness, HarnessOptions, HarnessOutcome, DEFAULT_EVALUATION_TIME};
use dq_cli::interactive::interactive_profile;
use dq_cli::report::{
    build_report, evaluate_ids, markdown, metric_label, read_json, write_json, ParamOverrides, ResultRow,
};
use dq_cli::subset::{write_subset, SubsetRecipe};
use dq_core::registry::{
    all_cards, card, filter, render_card, CardFilter, CardFormat, CardVarType, Dimension, Group, Modality,
    MetricValue,
};
use dq_core::selection::{rationale_document, select_all, Mode, RationaleDocument, UseCaseProfile};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "dq", version, about = "Use-case driven data quality assessment")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Browse and export metric cards.
    Cards {
        #[command(subcommand)]
        action: CardsAction,
    },
    /// Select metrics by answering the decision trees.
    Select {
        #[arg(long, conflicts_with = "interactive", required_unless_present = "interactive")]
        profile: Option<PathBuf>,
        #[arg(long)]
        interactive: bool,
        /// Fail on the first unanswered question.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute a selection on a dataset.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        selection: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        markdown: Option<PathBuf>,
    },
    /// Build a stratified subset, e.g. `sex_imbalance:n_male=4000,n_female=1000`.
    Subset {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        recipe: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute metrics on two datasets with the same schema.
    Compare {
        #[arg(long, num_args = 1, required = true)]
        data: Vec<PathBuf>,
        /// Comma-separated metric ids.
        #[arg(long, value_delimiter = ',', required = true)]
        metrics: Vec<String>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the PTB-XL case study from a local copy of the dataset.
    PtbxlHarness {
        #[arg(long)]
        root: PathBuf,
        #[arg(long, default_value = "ptbxl-harness")]
        out: PathBuf,
        #[arg(long, default_value = DEFAULT_EVALUATION_TIME)]
        evaluation_time: String,
    },
}

#[derive(Subcommand)]
enum CardsAction {
    List {
        #[arg(long)]
        dimension: Option<Dimension>,
        #[arg(long)]
        modality: Option<Modality>,
        #[arg(long)]
        vtype: Option<CardVarType>,
        #[arg(long)]
        group: Option<Group>,
    },
    Show {
        id: String,
        #[arg(long, default_value = "md")]
        format: CardFormat,
    },
    Export {
        #[arg(long, default_value = "md")]
        format: CardFormat,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn data<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(Failure::Data)
}

fn load_data(p: &Path) -> std::result::Result<LoadedDataset, Failure> {
    data(load(p).with_context(|| format!("loading dataset {}", p.display())))
}

fn read_overrides(p: Option<&Path>) -> Result<ParamOverrides> {
    p.map(read_json).transpose().map(Option::unwrap_or_default)
}

fn cards(action: CardsAction) -> Result<()> {
    match action {
        CardsAction::List { dimension, modality, vtype, group } => {
            for c in filter(CardFilter { dimension, modality, vtype, group }) {
                println!("{:<28} {:<26} {}", c.id, c.group, c.name);
            }
        }
        CardsAction::Show { id, format } => print!("{}", render_card(&id, format)?),
        CardsAction::Export { format, out } => {
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let ext = match format {
                CardFormat::Markdown => "md",
                CardFormat::Json => "json",
            };
            for c in all_cards() {
                let p = out.join(format!("{}.{ext}", c.id));
                fs::write(&p, render_card(&c.id, format)?).with_context(|| format!("writing {}", p.display()))?;
            }
            println!("wrote {} cards to {}", all_cards().len(), out.display());
        }
    }
    Ok(())
}

fn select(profile: Option<PathBuf>, interactive: bool, strict: bool, out: &Path) -> Result<()> {
    let profile = match profile {
        Some(p) => {
            let text = fs::read_to_string(&p).with_context(|| format!("reading profile {}", p.display()))?;
            UseCaseProfile::from_json(&text).with_context(|| format!("malformed profile {}", p.display()))?
        }
        None if interactive => interactive_profile(&mut io::stdin().lock(), &mut io::stderr())?,
        None => bail!("either --profile or --interactive is required"),
    };
    let mode = if strict { Mode::Strict } else { Mode::Partial };
    let sel = select_all(&profile, mode);
    if let Some((d, e)) = sel.errors().first() {
        bail!("{}: {e}", d.as_str());
    }
    for s in &sel.dimensions {
        if !s.relevant {
            continue;
        }
        let ids: Vec<&str> = s.metrics.iter().map(|m| m.id.as_str()).collect();
        let mut line = format!("{:<24} {}", s.dimension.as_str(), if ids.is_empty() { "-".into() } else { ids.join(", ") });
        if let Some(u) = s.unanswered.first() {
            line.push_str(&format!("  [unanswered `{}`: {}]", u.question, u.text));
        }
        if let Some(r) = &s.reason {
            line.push_str(&format!("  [{r}]"));
        }
        println!("{line}");
    }
    println!("{} rows, {} distinct metrics", sel.rows().len(), sel.metric_ids().len());
    let doc = rationale_document(&sel, &profile, Default::default());
    write_json(out, &doc)
}

fn print_rows(rows: &[ResultRow]) {
    for r in rows {
        let v = match &r.error {
            Some(e) => format!("error: {e}"),
            None => r.value.display_rounded(),
        };
        println!("{:<48} {v}", metric_label(r));
    }
}

#[derive(Serialize)]
struct Comparison {
    a: String,
    b: String,
    rows: Vec<ComparisonRow>,
}

#[derive(Serialize)]
struct ComparisonRow {
    metric_id: String,
    a: ResultRow,
    b: ResultRow,
    /// `b − a`.
    delta: Option<MetricValue>,
}

fn compare(paths: &[PathBuf], metrics: &[String], params: Option<&Path>, seed: u64, out: Option<&Path>) -> std::result::Result<(), Failure> {
    if paths.len() != 2 {
        return Err(Failure::Usage(anyhow!("compare takes exactly two --data arguments")));
    }
    for m in metrics {
        card(m).map_err(|e| Failure::Usage(e.into()))?;
    }
    let overrides = read_overrides(params)?;
    let a = load_data(&paths[0])?;
    let b = load_data(&paths[1])?;
    if let Some(msg) = schema_mismatch(&a.descriptor, &b.descriptor) {
        return Err(Failure::Data(anyhow!("schema mismatch: {msg}")));
    }
    let ra = evaluate_ids(&a, metrics, &overrides, seed);
    let rb = evaluate_ids(&b, metrics, &overrides, seed);
    println!("| Metric | {} | {} | delta |\n|---|---|---|---|", a.id, b.id);
    let mut rows = Vec::new();
    for (x, y) in ra.into_iter().zip(rb) {
        let delta = if x.error.is_none() && y.error.is_none() { y.value.delta(&x.value) } else { None };
        println!(
            "| {} | {} | {} | {} |",
            metric_label(&x),
            dq_cli::report::cell(&x),
            dq_cli::report::cell(&y),
            delta.as_ref().map(MetricValue::display_rounded).unwrap_or_else(|| "-".into())
        );
        rows.push(ComparisonRow { metric_id: x.metric_id.clone(), a: x, b: y, delta });
    }
    if let Some(out) = out {
        write_json(out, &Comparison { a: a.id, b: b.id, rows })?;
    }
    Ok(())
}

fn run(cli: Cli) -> std::result::Result<(), Failure> {
    match cli.command {
        Command::Cards { action } => cards(action)?,
        Command::Select { profile, interactive, strict, out } => select(profile, interactive, strict, &out)?,
        Command::Evaluate { data: d, selection, params, out, markdown: md } => {
            let doc: RationaleDocument = read_json(&selection)?;
            let overrides = read_overrides(params.as_deref())?;
            let ds = load_data(&d)?;
            let report = build_report(&ds, &doc, &overrides, cli.seed);
            print_rows(&report.results);
            write_json(&out, &report)?;
            if let Some(md) = md {
                fs::write(&md, markdown(&report)).with_context(|| format!("writing {}", md.display()))?;
            }
            let failed = report.results.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                eprintln!("{failed} of {} metrics failed; see the report", report.results.len());
            }
        }
        Command::Subset { data: d, recipe, out } => {
            let recipe = SubsetRecipe::parse(&recipe, cli.seed)?;
            let ds = load_data(&d)?;
            let rows = data(recipe.select(&ds))?;
            let path = write_subset(&ds, &recipe, &rows, &out)?;
            println!("{} records -> {}", rows.len(), path.display());
        }
        Command::Compare { data: d, metrics, params, out } => {
            compare(&d, &metrics, params.as_deref(), cli.seed, out.as_deref())?
        }
        Command::PtbxlHarness { root, out, evaluation_time } => {
            let o = HarnessOptions { root, out, seed: cli.seed, evaluation_time };
            match data(run_harness(&o))? {
                HarnessOutcome::Skipped { reason } => println!("skipped: {reason}"),
                HarnessOutcome::Ran { checks, markdown, .. } => {
                    for c in &checks {
                        println!(
                            "{} {} ({}): expected {}, got {}",
                            if c.passed { "PASS" } else { "FAIL" },
                            c.name,
                            c.kind,
                            c.expected,
                            c.actual
                        );
                    }
                    println!("table: {}", markdown.display());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
