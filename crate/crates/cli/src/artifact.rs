//! Provenance headers and file helpers shared by the subcommands.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rationale_core::corpus::{read_jsonl, write_jsonl, CaseDocument, CaseSummary, DatasetSplit, JSONL_HEADER_KEY};
use rationale_core::markup::{MarkupFile, RelevanceMarkup};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{hex, RunConfig};

pub const TOOL: &str = "rationale";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputHash {
    /// File name without its directory, so headers do not depend on where
    /// the pipeline ran.
    pub name: String,
    pub sha256: String,
}

/// Provenance block embedded in every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputHash>,
}

impl Header {
    pub fn new(command: &str, config: &RunConfig, inputs: &[&Path]) -> Result<Self> {
        let inputs = inputs
            .iter()
            .map(|p| {
                let bytes = fs::read(p).with_context(|| format!("{}: cannot read", p.display()))?;
                Ok(InputHash {
                    name: p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
                    sha256: hex(&Sha256::digest(&bytes)),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Header {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config_hash: config.hash(),
            config: config.to_json(),
            inputs,
        })
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("header serializes")
    }

    /// The header as a one-line JSON string.
    pub fn line(&self) -> String {
        self.to_value().to_string()
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("{}: cannot create directory", dir.display()))?;
    }
    Ok(())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    create_parent(path)?;
    fs::write(path, bytes).with_context(|| format!("{}: cannot write", path.display()))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).with_context(|| format!("{}: malformed JSON", path.display()))
}

/// JSON lines with the header as a first `{"_header": …}` line.
pub fn write_jsonl_with_header<T: Serialize>(path: &Path, header: &Header, records: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    writeln!(buf, "{}", serde_json::json!({ JSONL_HEADER_KEY: header.to_value() }))?;
    write_jsonl(&mut buf, records)?;
    write_bytes(path, &buf)
}

pub fn read_jsonl_file<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).with_context(|| format!("{}: cannot open", path.display()))?;
    read_jsonl(BufReader::new(file)).with_context(|| path.display().to_string())
}

/// Records of a JSON-lines file paired with their 1-based line numbers.
pub fn read_jsonl_numbered<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).with_context(|| format!("{} line {}", path.display(), i + 1))?;
        if i == 0 && value.as_object().is_some_and(|m| m.len() == 1 && m.contains_key(JSONL_HEADER_KEY)) {
            continue;
        }
        let record = serde_json::from_value(value).with_context(|| format!("{} line {}", path.display(), i + 1))?;
        out.push((i + 1, record));
    }
    Ok(out)
}

/// CSV text preceded by a `# ` header comment line.
pub fn with_csv_header(header: &Header, body: &[u8]) -> Vec<u8> {
    let mut out = format!("# {}\n", header.line()).into_bytes();
    out.extend_from_slice(body);
    out
}

/// CSV text with leading `#` comment lines removed, and the number removed.
pub fn strip_csv_comments(text: &str) -> (String, usize) {
    let mut skipped = 0;
    let mut rest = text;
    while rest.starts_with('#') {
        rest = rest.split_once('\n').map_or("", |(_, r)| r);
        skipped += 1;
    }
    (rest.to_string(), skipped)
}

pub fn load_corpus(path: &Path) -> Result<Vec<CaseDocument>> {
    let docs: Vec<CaseDocument> = read_jsonl_file(path)?;
    let mut seen = std::collections::HashSet::new();
    for d in &docs {
        d.validate().with_context(|| path.display().to_string())?;
        if !seen.insert(d.case_id.as_str()) {
            bail!("{}: duplicate case id {}", path.display(), d.case_id);
        }
    }
    Ok(docs)
}

pub fn load_summaries(path: &Path) -> Result<Vec<CaseSummary>> {
    read_jsonl_file(path)
}

pub fn load_markups(path: &Path) -> Result<Vec<RelevanceMarkup>> {
    let text = read_text(path)?;
    MarkupFile::parse(&text)
        .and_then(|f| f.to_markups())
        .with_context(|| path.display().to_string())
}

pub fn write_markups(path: &Path, header: &Header, markups: &[RelevanceMarkup]) -> Result<()> {
    write_json(path, &MarkupFile::from_markups(Some(header.to_value()), markups))
}

/// `split.json`: the split fields next to a header.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<Header>,
    #[serde(flatten)]
    pub split: DatasetSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Part {
    Train,
    Valid,
    Test,
    All,
}

/// Case ids of one part of a split file; `None` means every case.
pub fn part_ids(split: Option<&PathBuf>, part: Part) -> Result<Option<Vec<String>>> {
    let Some(path) = split else {
        return Ok(None);
    };
    let s: SplitFile = read_json(path)?;
    Ok(match part {
        Part::Train => Some(s.split.train),
        Part::Valid => Some(s.split.valid),
        Part::Test => Some(s.split.test),
        Part::All => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_comment_strip() {
        assert_eq!(strip_csv_comments("# a\n# b\nx,y\n1,2\n"), ("x,y\n1,2\n".to_string(), 2));
        assert_eq!(strip_csv_comments("x\n"), ("x\n".to_string(), 0));
    }
}
