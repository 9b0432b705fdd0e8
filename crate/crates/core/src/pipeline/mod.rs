//! Shard-to-corpus orchestration: per-document language identification,
//! quality warnings, keep/drop, PII scrubbing, hashing, URL classes, and
//! per-language partitioned JSONL output.

pub mod shard;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use chrono::{DateTime, SecondsFormat, Utc};
use rayon::prelude::*;
use thiserror::Error;

use crate::blocklist::{classify_url, Blocklists};
use crate::digest::{compute_digest, Digest};
use crate::filters::{self, FilterConfig, QualityWarning};
use crate::label::LabelId;
use crate::lid::LidModel;
use crate::pii::{scrub, PiiReport};
use crate::script::ScriptRegistry;

/// Confidence below which a document-level prediction is rejected.
pub const DEFAULT_THRESHOLD: f64 = 0.5;
/// Output parts rotate when they would exceed this many bytes.
pub const DEFAULT_PART_BYTES: u64 = 1 << 30;

const BATCH: usize = 256;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("no reader for {path}; use an explicit format")]
    UnknownFormat { path: String },
    #[error("unknown shard format {0:?}")]
    UnknownFormatName(String),
    #[error("threshold must lie in [0, 1], got {0}")]
    Threshold(f64),
    #[error("{0} must be strictly positive")]
    NonPositive(&'static str),
}

/// One input record: URL, fetch time, and payload lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub url: String,
    pub fetch_timestamp: DateTime<Utc>,
    pub lines: Vec<String>,
}

/// A kept document with all metadata attached. The `lines` are already
/// scrubbed; the identification scores were computed on the original text.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedDocument {
    pub url: String,
    pub fetch_timestamp: DateTime<Utc>,
    pub lines: Vec<String>,
    pub lid_label: LabelId,
    pub lid_prob: f64,
    /// Fraction of lines whose own prediction agrees with `lid_label`.
    pub lid_consistency: f64,
    /// 1 minus the fraction of script-bearing characters incompatible with
    /// the label's admissible scripts.
    pub script_consistency: f64,
    /// Retained warnings only; anything non-ignorable caused a rejection.
    pub warnings: BTreeSet<QualityWarning>,
    pub content_classes: BTreeSet<String>,
    pub digest: Option<Digest>,
    pub n_sentences: usize,
    pub content_length: usize,
}

/// The serialized row format of the output corpus.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OutputRecord {
    pub url: String,
    pub timestamp: String,
    pub text: String,
    pub lid_label: LabelId,
    pub lid_prob: f64,
    pub lid_consistency: f64,
    pub script_consistency: f64,
    pub quality_warnings: Vec<String>,
    pub category: Vec<String>,
    pub tlsh: Option<Digest>,
    pub n_sentences: usize,
    pub content_length: usize,
}

impl AnnotatedDocument {
    pub fn to_record(&self) -> OutputRecord {
        let mut quality_warnings: Vec<String> =
            self.warnings.iter().map(|w| w.name().to_string()).collect();
        quality_warnings.sort();
        OutputRecord {
            url: self.url.clone(),
            timestamp: self
                .fetch_timestamp
                .to_rfc3339_opts(SecondsFormat::Secs, true),
            text: self.lines.join("\n"),
            lid_label: self.lid_label,
            lid_prob: self.lid_prob,
            lid_consistency: self.lid_consistency,
            script_consistency: self.script_consistency,
            quality_warnings,
            category: self.content_classes.iter().cloned().collect(),
            tlsh: self.digest.clone(),
            n_sentences: self.n_sentences,
            content_length: self.content_length,
        }
    }
}

/// Why a document was dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectionReason {
    /// Top prediction below the confidence threshold.
    LowConfidence,
    /// Document predicted as an unassigned-script label.
    Und,
    /// Document predicted as non-linguistic content.
    Zxx,
    /// The model produced no prediction at all (no features).
    NoPrediction,
    /// Record had no payload lines.
    EmptyDocument,
    /// Non-ignorable quality warnings fired.
    Warnings(BTreeSet<QualityWarning>),
}

impl fmt::Display for RejectionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectionReason::LowConfidence => f.write_str("low_confidence"),
            RejectionReason::Und => f.write_str("und"),
            RejectionReason::Zxx => f.write_str("zxx"),
            RejectionReason::NoPrediction => f.write_str("no_prediction"),
            RejectionReason::EmptyDocument => f.write_str("empty_document"),
            RejectionReason::Warnings(set) => {
                let mut names: Vec<&str> = set.iter().map(|w| w.name()).collect();
                names.sort_unstable();
                write!(f, "warnings:{}", names.join("+"))
            }
        }
    }
}

#[derive(Debug)]
pub enum ProcessOutcome {
    Kept(Box<AnnotatedDocument>),
    Rejected(RejectionReason),
}

struct Processed {
    outcome: ProcessOutcome,
    doc_predict_nanos: u64,
    line_predict_nanos: u64,
    lines_predicted: u64,
    pii: PiiReport,
}

fn process_timed(
    raw: &RawDocument,
    model: &LidModel,
    cfg: &FilterConfig,
    registry: &ScriptRegistry,
    lists: &Blocklists,
    threshold: f64,
    seed: u64,
) -> Processed {
    let done = |outcome| Processed {
        outcome,
        doc_predict_nanos: 0,
        line_predict_nanos: 0,
        lines_predicted: 0,
        pii: PiiReport::default(),
    };
    if raw.lines.is_empty() {
        return done(ProcessOutcome::Rejected(RejectionReason::EmptyDocument));
    }

    let joined = raw.lines.join("\n");
    let doc_start = Instant::now();
    let doc_pred = model.predict(&joined, 1);
    let doc_predict_nanos = doc_start.elapsed().as_nanos() as u64;
    let done = |outcome| Processed {
        outcome,
        doc_predict_nanos,
        line_predict_nanos: 0,
        lines_predicted: 0,
        pii: PiiReport::default(),
    };
    let Some(top) = doc_pred.and_then(|p| p.into_iter().next()) else {
        return done(ProcessOutcome::Rejected(RejectionReason::NoPrediction));
    };
    if top.label.is_und() {
        return done(ProcessOutcome::Rejected(RejectionReason::Und));
    }
    if top.label.is_zxx() {
        return done(ProcessOutcome::Rejected(RejectionReason::Zxx));
    }
    if top.probability < threshold {
        return done(ProcessOutcome::Rejected(RejectionReason::LowConfidence));
    }

    let line_start = Instant::now();
    let line_labels: Vec<Option<LabelId>> = raw
        .lines
        .iter()
        .map(|line| {
            model
                .predict(line, 1)
                .and_then(|p| p.into_iter().next())
                .filter(|p| p.probability >= threshold)
                .map(|p| p.label)
        })
        .collect();
    let line_predict_nanos = line_start.elapsed().as_nanos() as u64;
    let lines_predicted = raw.lines.len() as u64;

    let agreeing = line_labels
        .iter()
        .filter(|l| **l == Some(top.label))
        .count();
    let lid_consistency = agreeing as f64 / raw.lines.len() as f64;

    let incompat = registry.incompatible_fraction(&joined, &top.label);
    let warnings = filters::annotate(&raw.lines, top.label, &line_labels, incompat, cfg);

    let done = |outcome, pii| Processed {
        outcome,
        doc_predict_nanos,
        line_predict_nanos,
        lines_predicted,
        pii,
    };
    if !filters::decide_keep(&warnings, top.label, cfg) {
        let blocking: BTreeSet<QualityWarning> = warnings
            .difference(&filters::ignorable_warnings(top.label, cfg))
            .copied()
            .collect();
        return done(
            ProcessOutcome::Rejected(RejectionReason::Warnings(blocking)),
            PiiReport::default(),
        );
    }

    let mut pii = PiiReport::default();
    let scrubbed: Vec<String> = raw
        .lines
        .iter()
        .map(|line| {
            let (clean, report) = scrub(line, seed);
            pii.emails_replaced += report.emails_replaced;
            pii.ips_replaced += report.ips_replaced;
            clean
        })
        .collect();
    let digest = compute_digest(&scrubbed.join("\n"));
    let content_classes = classify_url(&raw.url, lists);
    let n_sentences = scrubbed.len();
    let content_length = scrubbed.iter().map(|l| l.chars().count()).sum();
    let doc = AnnotatedDocument {
        url: raw.url.clone(),
        fetch_timestamp: raw.fetch_timestamp,
        lines: scrubbed,
        lid_label: top.label,
        lid_prob: top.probability,
        lid_consistency,
        script_consistency: 1.0 - incompat,
        warnings,
        content_classes,
        digest,
        n_sentences,
        content_length,
    };
    done(ProcessOutcome::Kept(Box::new(doc)), pii)
}

/// Runs the full per-document path: document LID with confidence and
/// open-set rejection, line LID, script consistency, warnings, keep/drop,
/// then scrubbing, hashing, and URL classes for kept documents.
#[allow(clippy::too_many_arguments)]
pub fn process_document(
    raw: &RawDocument,
    model: &LidModel,
    cfg: &FilterConfig,
    registry: &ScriptRegistry,
    lists: &Blocklists,
    threshold: f64,
    seed: u64,
) -> ProcessOutcome {
    process_timed(raw, model, cfg, registry, lists, threshold, seed).outcome
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub threshold: f64,
    pub seed: u64,
    /// 0 uses the global thread pool.
    pub workers: usize,
    pub part_max_bytes: u64,
    /// Force a shard format by name instead of inferring from extensions.
    pub format: Option<String>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            threshold: DEFAULT_THRESHOLD,
            seed: 0,
            workers: 0,
            part_max_bytes: DEFAULT_PART_BYTES,
            format: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct LabelStats {
    pub documents: u64,
    pub lines: u64,
    pub words: u64,
}

/// Aggregate counts and throughput for one run. All count fields are
/// independent of worker count and shard order; the throughput and elapsed
/// fields are measurements and vary run to run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunReport {
    pub total_records: u64,
    pub kept_documents: u64,
    pub rejected_documents: u64,
    pub parse_skipped: u64,
    pub per_label: BTreeMap<LabelId, LabelStats>,
    pub rejections: BTreeMap<String, u64>,
    pub emails_replaced: u64,
    pub ips_replaced: u64,
    pub threshold: f64,
    pub seed: u64,
    /// Single-worker line-LID throughput (sentences per second).
    pub sentences_per_second: f64,
    /// Single-worker document-LID throughput (documents per second).
    pub documents_per_second: f64,
    pub elapsed_seconds: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<12} {:>12} {:>12} {:>12}",
            "label", "documents", "lines", "words"
        )
        .unwrap();
        for (label, stats) in &self.per_label {
            writeln!(
                out,
                "{:<12} {:>12} {:>12} {:>12}",
                label.to_string(),
                stats.documents,
                stats.lines,
                stats.words
            )
            .unwrap();
        }
        writeln!(out).unwrap();
        writeln!(
            out,
            "records {}  kept {}  rejected {}  parse_skipped {}",
            self.total_records, self.kept_documents, self.rejected_documents, self.parse_skipped
        )
        .unwrap();
        if !self.rejections.is_empty() {
            writeln!(out, "rejections:").unwrap();
            for (reason, count) in &self.rejections {
                writeln!(out, "  {reason:<40} {count:>8}").unwrap();
            }
        }
        writeln!(
            out,
            "pii: {} emails, {} ips replaced",
            self.emails_replaced, self.ips_replaced
        )
        .unwrap();
        writeln!(
            out,
            "threshold {}  seed {}  T_S {:.1}/s  T_D {:.1}/s  elapsed {:.2}s",
            self.threshold,
            self.seed,
            self.sentences_per_second,
            self.documents_per_second,
            self.elapsed_seconds
        )
        .unwrap();
        out
    }
}

struct PartitionWriter {
    dir: PathBuf,
    part_index: usize,
    bytes_written: u64,
    max_bytes: u64,
    file: BufWriter<File>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl PartitionWriter {
    fn open(output_dir: &Path, label: LabelId, max_bytes: u64) -> Result<Self, PipelineError> {
        let dir = output_dir.join(label.to_string());
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let file = Self::open_part(&dir, 0)?;
        Ok(PartitionWriter {
            dir,
            part_index: 0,
            bytes_written: 0,
            max_bytes,
            file,
        })
    }

    fn open_part(dir: &Path, index: usize) -> Result<BufWriter<File>, PipelineError> {
        let path = dir.join(format!("part-{index}.jsonl"));
        Ok(BufWriter::new(File::create(&path).map_err(io_err(&path))?))
    }

    fn write_line(&mut self, line: &str) -> Result<(), PipelineError> {
        let needed = line.len() as u64 + 1;
        if self.bytes_written > 0 && self.bytes_written + needed > self.max_bytes {
            self.file.flush().map_err(io_err(&self.dir))?;
            self.part_index += 1;
            self.file = Self::open_part(&self.dir, self.part_index)?;
            self.bytes_written = 0;
        }
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.write_all(b"\n"))
            .map_err(io_err(&self.dir))?;
        self.bytes_written += needed;
        Ok(())
    }

    fn finish(mut self) -> Result<(), PipelineError> {
        self.file.flush().map_err(io_err(&self.dir))
    }
}

/// Processes shards into `<output_dir>/<lang>_<Script>/part-<k>.jsonl`.
/// Documents are scored in parallel batches but written in input order, so
/// reruns with the same inputs and seed produce byte-identical partitions.
pub fn run(
    shards: &[PathBuf],
    output_dir: &Path,
    model: &LidModel,
    cfg: &FilterConfig,
    registry: &ScriptRegistry,
    lists: &Blocklists,
    options: &RunOptions,
) -> Result<RunReport, PipelineError> {
    if !(0.0..=1.0).contains(&options.threshold) || options.threshold.is_nan() {
        return Err(PipelineError::Threshold(options.threshold));
    }
    let readers = shard::ReaderRegistry::standard();
    if let Some(name) = &options.format {
        if readers.get(name).is_none() {
            return Err(PipelineError::UnknownFormatName(name.clone()));
        }
    }
    std::fs::create_dir_all(output_dir).map_err(io_err(output_dir))?;

    let pool = if options.workers > 0 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(options.workers)
                .build()
                .expect("worker pool"),
        )
    } else {
        None
    };

    let started = Instant::now();
    let doc_nanos = AtomicU64::new(0);
    let line_nanos = AtomicU64::new(0);
    let docs_predicted = AtomicU64::new(0);
    let lines_predicted = AtomicU64::new(0);

    let mut report_counts = ReportCounts::default();
    let mut writers: BTreeMap<LabelId, PartitionWriter> = BTreeMap::new();

    for shard_path in shards {
        let reader = match &options.format {
            Some(name) => readers.get(name).expect("format checked above"),
            None => readers
                .for_path(shard_path)
                .ok_or_else(|| PipelineError::UnknownFormat {
                    path: shard_path.display().to_string(),
                })?,
        };
        let contents = reader.read(shard_path)?;
        report_counts.parse_skipped += contents.parse_skipped;
        report_counts.total_records += contents.parse_skipped + contents.documents.len() as u64;

        for batch in contents.documents.chunks(BATCH) {
            let score = || -> Vec<Processed> {
                batch
                    .par_iter()
                    .map(|raw| {
                        process_timed(
                            raw,
                            model,
                            cfg,
                            registry,
                            lists,
                            options.threshold,
                            options.seed,
                        )
                    })
                    .collect()
            };
            let processed = match &pool {
                Some(pool) => pool.install(score),
                None => score(),
            };
            for item in processed {
                doc_nanos.fetch_add(item.doc_predict_nanos, Ordering::Relaxed);
                line_nanos.fetch_add(item.line_predict_nanos, Ordering::Relaxed);
                if item.doc_predict_nanos > 0 {
                    docs_predicted.fetch_add(1, Ordering::Relaxed);
                }
                lines_predicted.fetch_add(item.lines_predicted, Ordering::Relaxed);
                match item.outcome {
                    ProcessOutcome::Kept(doc) => {
                        report_counts.keep(&doc, &item.pii);
                        let writer = match writers.entry(doc.lid_label) {
                            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                            std::collections::btree_map::Entry::Vacant(e) => {
                                e.insert(PartitionWriter::open(
                                    output_dir,
                                    doc.lid_label,
                                    options.part_max_bytes,
                                )?)
                            }
                        };
                        let line = serde_json::to_string(&doc.to_record())
                            .expect("record serializes");
                        writer.write_line(&line)?;
                    }
                    ProcessOutcome::Rejected(reason) => report_counts.reject(&reason),
                }
            }
        }
    }
    for (_, writer) in writers {
        writer.finish()?;
    }

    let elapsed = started.elapsed().as_secs_f64();
    let per_second = |count: u64, nanos: u64| {
        if nanos == 0 {
            0.0
        } else {
            count as f64 / (nanos as f64 / 1e9)
        }
    };
    Ok(RunReport {
        total_records: report_counts.total_records,
        kept_documents: report_counts.kept,
        rejected_documents: report_counts.rejected,
        parse_skipped: report_counts.parse_skipped,
        per_label: report_counts.per_label,
        rejections: report_counts.rejections,
        emails_replaced: report_counts.emails,
        ips_replaced: report_counts.ips,
        threshold: options.threshold,
        seed: options.seed,
        sentences_per_second: per_second(
            lines_predicted.load(Ordering::Relaxed),
            line_nanos.load(Ordering::Relaxed),
        ),
        documents_per_second: per_second(
            docs_predicted.load(Ordering::Relaxed),
            doc_nanos.load(Ordering::Relaxed),
        ),
        elapsed_seconds: elapsed,
    })
}

#[derive(Default)]
struct ReportCounts {
    total_records: u64,
    kept: u64,
    rejected: u64,
    parse_skipped: u64,
    per_label: BTreeMap<LabelId, LabelStats>,
    rejections: BTreeMap<String, u64>,
    emails: u64,
    ips: u64,
}

impl ReportCounts {
    fn keep(&mut self, doc: &AnnotatedDocument, pii: &PiiReport) {
        self.kept += 1;
        self.emails += pii.emails_replaced;
        self.ips += pii.ips_replaced;
        let stats = self.per_label.entry(doc.lid_label).or_default();
        stats.documents += 1;
        stats.lines += doc.lines.len() as u64;
        stats.words += doc
            .lines
            .iter()
            .map(|l| l.split_whitespace().count() as u64)
            .sum::<u64>();
    }

    fn reject(&mut self, reason: &RejectionReason) {
        self.rejected += 1;
        *self.rejections.entry(reason.to_string()).or_default() += 1;
    }
}

/// Scaling inputs for [`estimate_walltime`]: document count, parallel jobs,
/// mean sentences per document, and the two LID throughputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalltimeParams {
    pub documents: f64,
    pub parallel_jobs: f64,
    pub sentences_per_doc: f64,
    pub sentences_per_second: f64,
    pub documents_per_second: f64,
}

/// Estimated wall time in hours:
/// D / (3600 P) * (S / T_S + 1 / T_D).
pub fn estimate_walltime(p: &WalltimeParams) -> Result<f64, PipelineError> {
    if !(p.documents >= 0.0) {
        return Err(PipelineError::NonPositive("documents"));
    }
    for (name, value) in [
        ("parallel_jobs", p.parallel_jobs),
        ("sentences_per_doc", p.sentences_per_doc),
        ("sentences_per_second", p.sentences_per_second),
        ("documents_per_second", p.documents_per_second),
    ] {
        if !(value > 0.0) {
            return Err(PipelineError::NonPositive(name));
        }
    }
    Ok(p.documents / (3600.0 * p.parallel_jobs)
        * (p.sentences_per_doc / p.sentences_per_second + 1.0 / p.documents_per_second))
}
