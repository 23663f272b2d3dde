use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use revex::io::{load_corpus, write_corpus_jsonl, write_events_jsonl, CorpusFormat};
use revex::simulate::{
    analyze_jsonl, run_policy, CompareSpec, Condition, PolicyKind, PolicyParams, ReaderPolicy, RunReport,
};
use revex::synth::{generate, SyntheticConfig};
use revex_core::embedding::DEFAULT_SIMILARITY_THRESHOLD;
use revex_core::{Catalog, EngineConfig, IngestConfig, TfIdfEmbedder};

/// Scripted-reader simulations over a review corpus.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one policy under one condition.
    Run {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        product: Option<String>,
        #[arg(long, value_parser = parse_policy)]
        policy: PolicyKind,
        #[arg(long, value_parser = parse_condition)]
        condition: Condition,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.9)]
        bias: f64,
        #[arg(long, default_value_t = DEFAULT_SIMILARITY_THRESHOLD)]
        threshold: f64,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also export the event log as JSON lines.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Compare arms over many seeds, as configured in a JSON, TOML or YAML file.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Recompute a run report from an exported event log.
    Analyze {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        product: Option<String>,
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SIMILARITY_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic corpus as JSON lines.
    Generate {
        #[arg(long, default_value = "synthetic")]
        product: String,
        #[arg(long, num_args = 3, value_names = ["POS", "NEU", "NEG"], default_values_t = [100, 100, 100])]
        mix: Vec<usize>,
        #[arg(long, default_value_t = 0.0)]
        redundancy: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Load a corpus and print its rejection report.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    PolicyKind::parse(s).ok_or_else(|| format!("unknown policy {s:?}"))
}

fn parse_condition(s: &str) -> Result<Condition, String> {
    Condition::parse(s).ok_or_else(|| format!("unknown condition {s:?}, expected B, M, S or MS"))
}

fn emit(out: Option<&Path>, body: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, body).with_context(|| path.display().to_string()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn catalog(corpus: &Path, threshold: f64) -> anyhow::Result<Catalog> {
    let (corpus, report) = load_corpus(corpus, CorpusFormat::from_path(corpus), IngestConfig::default())?;
    if report.rejected() > 0 {
        eprintln!("{} of {} records rejected", report.rejected(), report.total_records);
    }
    Ok(Catalog::build(&corpus, &TfIdfEmbedder, threshold)?)
}

fn product_or_first(catalog: &Catalog, product: Option<String>) -> anyhow::Result<String> {
    match product {
        Some(p) => Ok(p),
        None => match catalog.iter().next() {
            Some(s) => Ok(s.product_id().to_string()),
            None => bail!("corpus has no products"),
        },
    }
}

fn report_csv(r: &RunReport) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let dist = |s| r.distribution.get(&s).map_or(String::new(), |d: &f64| d.to_string());
    w.write_record([
        "product_id",
        "events",
        "steps",
        "visited",
        "covered",
        "visit_pct",
        "coverage_pct",
        "coverage_per_step",
        "dist_positive",
        "dist_neutral",
        "dist_negative",
        "max_gap",
        "skewed_toward",
        "area_changes",
    ])?;
    w.write_record([
        r.product_id.clone(),
        r.events.to_string(),
        r.steps.to_string(),
        r.visited.to_string(),
        r.covered.to_string(),
        r.visit_pct.to_string(),
        r.coverage_pct.to_string(),
        r.coverage_per_step.to_string(),
        dist(revex_core::Sentiment::Positive),
        dist(revex_core::Sentiment::Neutral),
        dist(revex_core::Sentiment::Negative),
        r.max_gap.to_string(),
        r.skewed_toward.map_or(String::new(), |s| s.to_string()),
        r.transitions.changes().to_string(),
    ])?;
    Ok(w.into_inner()?)
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run {
            corpus,
            product,
            policy,
            condition,
            steps,
            seed,
            bias,
            threshold,
            out,
            log,
            format,
        } => {
            let catalog = catalog(&corpus, threshold)?;
            let product = product_or_first(&catalog, product)?;
            let policy = ReaderPolicy {
                kind: policy,
                seed,
                steps,
                params: PolicyParams { bias },
            };
            let run = run_policy(&policy, &catalog, &product, condition, &EngineConfig::default())?;
            if let Some(path) = log {
                let file = File::create(&path).with_context(|| path.display().to_string())?;
                write_events_jsonl(std::io::BufWriter::new(file), &run.events)?;
            }
            let body = match format {
                Format::Json => serde_json::to_vec_pretty(&run.report)?,
                Format::Csv => report_csv(&run.report)?,
            };
            emit(out.as_deref(), &body)
        }
        Command::Compare { config, out, format } => {
            let table = CompareSpec::from_file(&config)?.run()?;
            let body = match format {
                Format::Json => serde_json::to_vec_pretty(&table)?,
                Format::Csv => table.to_csv().into_bytes(),
            };
            emit(out.as_deref(), &body)
        }
        Command::Analyze {
            corpus,
            product,
            log,
            threshold,
            out,
        } => {
            let catalog = catalog(&corpus, threshold)?;
            let product = product_or_first(&catalog, product)?;
            let file = File::open(&log).with_context(|| log.display().to_string())?;
            let (report, errors) = analyze_jsonl(BufReader::new(file), &catalog, &product, &EngineConfig::default())?;
            for e in &errors {
                eprintln!("line {}: {}", e.line, e.message);
            }
            emit(out.as_deref(), &serde_json::to_vec_pretty(&report)?)
        }
        Command::Generate {
            product,
            mix,
            redundancy,
            seed,
            out,
        } => {
            let config = SyntheticConfig {
                product_id: product,
                mix: [mix[0], mix[1], mix[2]],
                redundancy,
                seed,
                ..SyntheticConfig::default()
            };
            let corpus = generate(&config);
            let file = File::create(&out).with_context(|| out.display().to_string())?;
            write_corpus_jsonl(std::io::BufWriter::new(file), &corpus.records)?;
            Ok(())
        }
        Command::Ingest { corpus, out } => {
            let (_, report) = load_corpus(&corpus, CorpusFormat::from_path(&corpus), IngestConfig::default())?;
            emit(out.as_deref(), &serde_json::to_vec_pretty(&report)?)
        }
    }
}
