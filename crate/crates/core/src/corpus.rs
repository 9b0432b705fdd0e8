//! Training/evaluation corpus: labeled sentences and their on-disk line format.
//!
//! One example per line: `__label__<lang>_<Script> <text>`, UTF-8.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::label::{LabelError, LabelId};

pub const LABEL_PREFIX: &str = "__label__";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    pub label: LabelId,
    pub text: String,
}

impl LabeledSentence {
    pub fn new(label: LabelId, text: impl Into<String>) -> Self {
        Self { label, text: text.into() }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: missing `{LABEL_PREFIX}` prefix")]
    MissingPrefix { line: usize },
    #[error("line {line}: {source}")]
    BadLabel {
        line: usize,
        #[source]
        source: LabelError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parses a single `__label__xxx_Yyyy text` line. The text may be empty.
pub fn parse_line(line: &str) -> Result<LabeledSentence, LabelError> {
    let rest = line.strip_prefix(LABEL_PREFIX).ok_or_else(|| LabelError::Shape(line.to_string()))?;
    let (label_str, text) = match rest.split_once(' ') {
        Some((l, t)) => (l, t),
        None => (rest, ""),
    };
    Ok(LabeledSentence::new(label_str.parse()?, text))
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<LabeledSentence>, CorpusError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        if !line.starts_with(LABEL_PREFIX) {
            return Err(CorpusError::MissingPrefix { line: idx + 1 });
        }
        let sentence =
            parse_line(&line).map_err(|source| CorpusError::BadLabel { line: idx + 1, source })?;
        out.push(sentence);
    }
    Ok(out)
}

pub fn write_corpus(path: impl AsRef<Path>, corpus: &[LabeledSentence]) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for example in corpus {
        writeln!(out, "{}{} {}", LABEL_PREFIX, example.label, example.text)?;
    }
    out.flush()
}
