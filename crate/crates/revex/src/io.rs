//! Corpus, vector and event-log file formats.
//!
//! Corpora are JSON lines (one review object per line) or CSV with the same
//! column names. Event logs are JSON lines of [`InteractionEvent`].

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use revex_core::{Corpus, Ingest, IngestConfig, InteractionEvent, RawReview, RejectionReport};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    JsonLines,
    Csv,
}

impl CorpusFormat {
    /// `.csv` is CSV, anything else JSON lines.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::JsonLines,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "json-lines" | "jsonl" | "ndjson" => Some(CorpusFormat::JsonLines),
            "csv" => Some(CorpusFormat::Csv),
            _ => None,
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Loads and filters a corpus. Bad records are reported, not fatal; an
/// unreadable file is.
pub fn load_corpus(path: &Path, format: CorpusFormat, config: IngestConfig) -> Result<(Corpus, RejectionReport)> {
    let file = open(path)?;
    match format {
        CorpusFormat::JsonLines => read_corpus_jsonl(BufReader::new(file), config).map_err(|e| Error::io(path, e)),
        CorpusFormat::Csv => read_corpus_csv(file, config).map_err(|e| Error::Format {
            path: path.into(),
            message: e,
        }),
    }
}

pub fn read_corpus_jsonl(reader: impl BufRead, config: IngestConfig) -> std::io::Result<(Corpus, RejectionReport)> {
    let mut ingest = Ingest::new(config);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RawReview>(&line) {
            Ok(raw) => {
                ingest.push(i + 1, raw);
            }
            Err(e) => ingest.reject_malformed(i + 1, e.to_string()),
        }
    }
    Ok(ingest.finish())
}

/// CSV with a header row. Only a broken header is fatal.
pub fn read_corpus_csv(reader: impl Read, config: IngestConfig) -> Result<(Corpus, RejectionReport), String> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    let mut ingest = Ingest::new(config);
    for (i, record) in rdr.records().enumerate() {
        // Line 1 is the header.
        let line = i + 2;
        let parsed = record
            .map_err(|e| e.to_string())
            .and_then(|r| r.deserialize::<RawReview>(Some(&headers)).map_err(|e| e.to_string()));
        match parsed {
            Ok(raw) => {
                ingest.push(line, raw);
            }
            Err(e) => ingest.reject_malformed(line, e),
        }
    }
    Ok(ingest.finish())
}

pub fn write_corpus_jsonl(mut writer: impl Write, reviews: &[RawReview]) -> std::io::Result<()> {
    for r in reviews {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

#[derive(Deserialize)]
struct VectorLine {
    review_id: String,
    vector: Vec<f64>,
}

/// Externally computed embeddings, one `{"review_id", "vector"}` per line.
pub fn load_vectors(path: &Path) -> Result<BTreeMap<String, Vec<f64>>> {
    let reader = BufReader::new(open(path)?);
    let mut out = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: VectorLine = serde_json::from_str(&line).map_err(|e| Error::Format {
            path: path.into(),
            message: format!("line {}: {e}", i + 1),
        })?;
        if out.insert(v.review_id.clone(), v.vector).is_some() {
            return Err(Error::Format {
                path: path.into(),
                message: format!("line {}: duplicate vector for {}", i + 1, v.review_id),
            });
        }
    }
    Ok(out)
}

/// A log line that could not be used, with its 1-based number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

pub fn write_events_jsonl(mut writer: impl Write, events: &[InteractionEvent]) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut writer, e)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn events_to_jsonl(events: &[InteractionEvent]) -> String {
    let mut buf = Vec::new();
    write_events_jsonl(&mut buf, events).expect("writing to memory");
    String::from_utf8(buf).expect("json is utf-8")
}

/// Parses an event log, skipping (and reporting) lines that do not parse.
pub fn read_events_jsonl(reader: impl BufRead) -> std::io::Result<(Vec<InteractionEvent>, Vec<LineError>)> {
    let mut events = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(e) => events.push(e),
            Err(e) => errors.push(LineError {
                line: i + 1,
                message: e.to_string(),
            }),
        }
    }
    Ok((events, errors))
}
