use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

use qalign_core::jsonl::{read_jsonl, write_jsonl};

/// Reads a JSONL file; `-` reads standard input.
pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let records = if path == Path::new("-") {
        read_jsonl(io::stdin().lock())
    } else {
        let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        read_jsonl(BufReader::new(file))
    };
    records.with_context(|| format!("{}", path.display()))
}

fn sink(path: &Path) -> Result<Box<dyn Write>> {
    if path == Path::new("-") {
        return Ok(Box::new(io::stdout().lock()));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(Box::new(BufWriter::new(file)))
}

/// Writes records as JSONL; `-` writes standard output.
pub fn write_records<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut out = sink(path)?;
    write_jsonl(&mut out, records).with_context(|| format!("writing {}", path.display()))?;
    out.flush().with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Pretty,
    Compact,
}

/// Writes a JSON report to `path`, or standard output when absent.
pub fn write_report<T: Serialize>(path: Option<&Path>, report: &T, format: ReportFormat) -> Result<()> {
    let mut text = match format {
        ReportFormat::Pretty => serde_json::to_string_pretty(report)?,
        ReportFormat::Compact => serde_json::to_string(report)?,
    };
    text.push('\n');
    let path = path.unwrap_or(Path::new("-"));
    let mut out = sink(path)?;
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .with_context(|| format!("writing {}", path.display()))
}
