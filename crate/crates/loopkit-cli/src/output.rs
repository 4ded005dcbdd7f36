//! Tables, manifests and the exit-code contract.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use loopkit::LoopError;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// A failed run, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Bad flag values or inputs (exit 2).
    Usage(String),
    /// A size guard fired (exit 3).
    Guard(String),
    /// A check reported a failure or a construction broke (exit 1).
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Guard(_) => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {}", m),
            CliError::Guard(m) => write!(f, "{}", m),
            CliError::Failed(m) => write!(f, "failed: {}", m),
        }
    }
}

impl From<LoopError> for CliError {
    fn from(e: LoopError) -> Self {
        match e {
            LoopError::Guard { .. } => CliError::Guard(e.to_string()),
            LoopError::Construction(_) => CliError::Failed(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(format!("i/o: {}", e))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failed(format!("csv: {}", e))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// A rectangular result with a header row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Failed(format!("csv: {}", e)))?;
        String::from_utf8(bytes).map_err(|e| CliError::Failed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|r| self.header.iter().cloned().zip(r.iter().map(|v| serde_json::Value::String(v.clone()))).collect())
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("rows serialise");
        s.push('\n');
        s
    }
}

/// Output format of the table body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Provenance record written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub timestamp: String,
    pub outputs: Vec<OutputDigest>,
    pub summary: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{:02x}", b)).collect()
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// What a subcommand produced.
pub struct Report {
    pub table: Table,
    pub summary: serde_json::Value,
    /// Set when a check inside the command failed.
    pub failure: Option<String>,
}

impl Report {
    pub fn new(table: Table) -> Self {
        Report { table, summary: serde_json::Value::Null, failure: None }
    }

    pub fn with_summary(mut self, summary: impl Serialize) -> Self {
        self.summary = serde_json::to_value(summary).expect("summary serialises");
        self
    }
}

/// Writes the body to stdout or to `out` plus its manifest.
pub fn emit(
    report: &Report,
    format: Format,
    out: Option<&Path>,
    command: &str,
    parameters: serde_json::Value,
    seed: u64,
) -> CliResult<()> {
    let body = match format {
        Format::Csv => report.table.to_csv()?,
        Format::Json => report.table.to_json(),
    };
    match out {
        None => print!("{}", body),
        Some(path) => {
            std::fs::write(path, &body)?;
            let manifest = RunManifest {
                command: command.to_string(),
                parameters,
                seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                timestamp: chrono::Utc::now().to_rfc3339(),
                outputs: vec![OutputDigest {
                    path: path.display().to_string(),
                    bytes: body.len(),
                    sha256: sha256_hex(body.as_bytes()),
                }],
                summary: report.summary.clone(),
            };
            let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
            json.push('\n');
            std::fs::write(manifest_path(path), json)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_fields_with_commas() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1-2,3-4".into(), "x".into()]);
        assert_eq!(t.to_csv().unwrap(), "a,b\n\"1-2,3-4\",x\n");
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
