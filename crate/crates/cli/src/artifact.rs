//! CSV artifacts with `#`-prefixed reproducibility metadata.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};
use vqgo_core::format_sig17;

use crate::config::ExperimentConfig;

pub const TOOL_NAME: &str = "vqgo";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the compact JSON form of a config.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    Sha256::digest(cfg.to_compact_json().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn join_floats(xs: &[f64], sep: &str) -> String {
    xs.iter().map(|&x| format_sig17(x)).collect::<Vec<_>>().join(sep)
}

/// A table plus metadata, rendered as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    /// Experiment-specific `key: value` lines, written after the standard ones.
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Artifact {
    /// Header row and data rows; everything except the metadata lines.
    pub fn body(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn render(&self, cfg: &ExperimentConfig) -> String {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut out = String::new();
        let mut line = |k: &str, v: &str| out.push_str(&format!("# {k}: {v}\n"));
        line("tool", TOOL_NAME);
        line("version", TOOL_VERSION);
        line("experiment", cfg.experiment.kind());
        line("seed", &cfg.seed.to_string());
        line("config_sha256", &config_hash(cfg));
        line("created_unix_s", &created.to_string());
        line("config", &cfg.to_compact_json());
        for (k, v) in &self.metadata {
            line(k, v);
        }
        out + &self.body()
    }
}

/// Parsed CSV artifact: metadata map plus rows keyed by column name.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedArtifact {
    pub metadata: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ParsedArtifact {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut metadata = BTreeMap::new();
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut header = None;
        for l in lines.by_ref() {
            if let Some(meta) = l.strip_prefix('#') {
                if let Some((k, v)) = meta.trim_start().split_once(": ") {
                    metadata.insert(k.to_string(), v.to_string());
                }
            } else {
                header = Some(l.split(',').map(str::to_string).collect::<Vec<_>>());
                break;
            }
        }
        let header = header.ok_or("artifact has no header row")?;
        let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != header.len()) {
            return Err(format!("row {} has {} fields, header has {}", i + 1, r.len(), header.len()));
        }
        Ok(Self { metadata, header, rows })
    }

    pub fn field<'a>(&self, row: &'a [String], name: &str) -> Result<&'a str, String> {
        let idx = self.header.iter().position(|h| h == name).ok_or(format!("missing column {name}"))?;
        Ok(&row[idx])
    }

    pub fn float(&self, row: &[String], name: &str) -> Result<f64, String> {
        let raw = self.field(row, name)?;
        raw.parse().map_err(|_| format!("column {name}: cannot parse {raw:?}"))
    }

    pub fn floats(&self, row: &[String], name: &str) -> Result<Vec<f64>, String> {
        let raw = self.field(row, name)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(';')
            .map(|x| x.parse().map_err(|_| format!("column {name}: cannot parse {x:?}")))
            .collect()
    }
}

/// Lines of a CSV file that are not metadata.
pub fn csv_body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}
