//! Shard readers. Two formats ship: WET-style extraction archives and
//! JSONL with `url`/`timestamp`/`text` fields. Records that fail to parse
//! are counted and skipped, never fatal.

use std::path::Path;

use chrono::{DateTime, Utc};

use super::{PipelineError, RawDocument};

const WET_MARKER: &str = "WARC/1.0";

#[derive(Debug, Default)]
pub struct ShardContents {
    pub documents: Vec<RawDocument>,
    pub parse_skipped: u64,
}

pub trait ShardReader: Send + Sync {
    fn name(&self) -> &'static str;
    /// Extensions (without the dot) this reader claims.
    fn extensions(&self) -> &'static [&'static str];
    fn read(&self, path: &Path) -> Result<ShardContents, PipelineError>;
}

pub struct ReaderRegistry {
    readers: Vec<Box<dyn ShardReader>>,
}

impl ReaderRegistry {
    pub fn empty() -> Self {
        ReaderRegistry {
            readers: Vec::new(),
        }
    }

    pub fn standard() -> Self {
        let mut registry = Self::empty();
        registry.register(Box::new(WetReader));
        registry.register(Box::new(JsonlReader));
        registry
    }

    pub fn register(&mut self, reader: Box<dyn ShardReader>) {
        self.readers.push(reader);
    }

    pub fn get(&self, name: &str) -> Option<&dyn ShardReader> {
        self.readers
            .iter()
            .find(|r| r.name() == name)
            .map(|r| r.as_ref())
    }

    pub fn for_path(&self, path: &Path) -> Option<&dyn ShardReader> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        self.readers
            .iter()
            .find(|r| r.extensions().contains(&ext.as_str()))
            .map(|r| r.as_ref())
    }
}

fn read_lossy(path: &Path) -> Result<String, PipelineError> {
    let bytes = std::fs::read(path).map_err(super::io_err(path))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn split_payload(text: &str) -> Vec<String> {
    text.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect()
}

/// WET-style archives: each record starts with a `WARC/1.0` line, carries
/// `Key: Value` headers up to a blank line, then the extracted payload.
/// `WARC-Target-URI` and a parseable `WARC-Date` are required.
pub struct WetReader;

impl ShardReader for WetReader {
    fn name(&self) -> &'static str {
        "wet"
    }

    fn extensions(&self) -> &'static [&'static str] {
        &["wet", "warc"]
    }

    fn read(&self, path: &Path) -> Result<ShardContents, PipelineError> {
        let text = read_lossy(path)?;
        let mut contents = ShardContents::default();
        let lines: Vec<&str> = text
            .split('\n')
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .collect();
        let mut i = 0;
        while i < lines.len() {
            if lines[i] != WET_MARKER {
                i += 1;
                continue;
            }
            i += 1;
            let mut url = None;
            let mut date = None;
            let mut headers_ok = true;
            while i < lines.len() && !lines[i].is_empty() && lines[i] != WET_MARKER {
                match lines[i].split_once(':') {
                    Some((key, value)) => {
                        let value = value.trim();
                        match key.trim() {
                            "WARC-Target-URI" => url = Some(value.to_string()),
                            "WARC-Date" => date = Some(value.to_string()),
                            _ => {}
                        }
                    }
                    None => headers_ok = false,
                }
                i += 1;
            }
            if i < lines.len() && lines[i].is_empty() {
                i += 1;
            }
            let mut payload: Vec<String> = Vec::new();
            while i < lines.len() && lines[i] != WET_MARKER {
                payload.push(lines[i].to_string());
                i += 1;
            }
            while payload.last().is_some_and(|l| l.is_empty()) {
                payload.pop();
            }
            let timestamp = date.as_deref().and_then(parse_timestamp);
            match (headers_ok, url, timestamp) {
                (true, Some(url), Some(fetch_timestamp)) => {
                    contents.documents.push(RawDocument {
                        url,
                        fetch_timestamp,
                        lines: payload,
                    });
                }
                _ => contents.parse_skipped += 1,
            }
        }
        Ok(contents)
    }
}

fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s)
        .ok()
        .map(|dt| dt.with_timezone(&Utc))
}

/// JSONL shards: one object per line with `url`, `timestamp` (RFC 3339),
/// and `text`. Blank lines are separators; anything else malformed counts
/// as skipped.
pub struct JsonlReader;

#[derive(serde::Deserialize)]
struct JsonlRecord {
    url: String,
    timestamp: String,
    text: String,
}

impl ShardReader for JsonlReader {
    fn name(&self) -> &'static str {
        "jsonl"
    }

    fn extensions(&self) -> &'static [&'static str] {
        &["jsonl", "json"]
    }

    fn read(&self, path: &Path) -> Result<ShardContents, PipelineError> {
        let text = read_lossy(path)?;
        let mut contents = ShardContents::default();
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Option<RawDocument> = serde_json::from_str::<JsonlRecord>(line)
                .ok()
                .and_then(|rec| {
                    let fetch_timestamp = parse_timestamp(&rec.timestamp)?;
                    let lines = if rec.text.is_empty() {
                        Vec::new()
                    } else {
                        split_payload(&rec.text)
                    };
                    Some(RawDocument {
                        url: rec.url,
                        fetch_timestamp,
                        lines,
                    })
                });
            match parsed {
                Some(doc) => contents.documents.push(doc),
                None => contents.parse_skipped += 1,
            }
        }
        Ok(contents)
    }
}
