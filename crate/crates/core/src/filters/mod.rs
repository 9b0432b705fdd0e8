//! Quality warnings and the keep/drop policy.
//!
//! Sixteen warning rules run over an annotated document. A document is kept
//! when every fired warning is ignorable: `short_sentences`, `header`, and
//! `footer` always are, and `long_word` and `repetition` are ignorable for
//! languages written without word boundaries.

mod rules;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use crate::label::{LabelId, ScriptCode};

const DEFAULT_CURSED_PATTERNS: &str = include_str!("../../data/cursed_patterns.txt");
const DEFAULT_ADULT_TERMS: &str = include_str!("../../data/adult_terms.txt");

/// Phrases whose presence (case-insensitive) marks boilerplate policy text.
pub const POLICY_PHRASES: [&str; 6] = [
    "terms of use",
    "privacy policy",
    "cookie policy",
    "uses cookies",
    "use of cookies",
    "use cookies",
];

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("invalid pattern {pattern:?}: {source}")]
    Pattern {
        pattern: String,
        source: regex::Error,
    },
    #[error("{field} must lie in [0, 1], got {value}")]
    RatioRange { field: &'static str, value: f64 },
}

/// One of the sixteen document quality warnings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QualityWarning {
    Tiny,
    ShortSentences,
    Header,
    Footer,
    LidInconsistent,
    ScriptInconsistent,
    ListCase,
    TechnicalChars,
    CursedRegex,
    Repetition,
    LongWord,
    LoremIpsum,
    Policy,
    JsWarning,
    CurlyBracket,
    AdultWords,
}

impl QualityWarning {
    pub const ALL: [QualityWarning; 16] = [
        QualityWarning::Tiny,
        QualityWarning::ShortSentences,
        QualityWarning::Header,
        QualityWarning::Footer,
        QualityWarning::LidInconsistent,
        QualityWarning::ScriptInconsistent,
        QualityWarning::ListCase,
        QualityWarning::TechnicalChars,
        QualityWarning::CursedRegex,
        QualityWarning::Repetition,
        QualityWarning::LongWord,
        QualityWarning::LoremIpsum,
        QualityWarning::Policy,
        QualityWarning::JsWarning,
        QualityWarning::CurlyBracket,
        QualityWarning::AdultWords,
    ];

    /// Stable snake-case name used in reports and serialized metadata.
    pub fn name(self) -> &'static str {
        match self {
            QualityWarning::Tiny => "tiny",
            QualityWarning::ShortSentences => "short_sentences",
            QualityWarning::Header => "header",
            QualityWarning::Footer => "footer",
            QualityWarning::LidInconsistent => "lid_inconsistent",
            QualityWarning::ScriptInconsistent => "script_inconsistent",
            QualityWarning::ListCase => "list_case",
            QualityWarning::TechnicalChars => "technical_chars",
            QualityWarning::CursedRegex => "cursed_regex",
            QualityWarning::Repetition => "repetition",
            QualityWarning::LongWord => "long_word",
            QualityWarning::LoremIpsum => "lorem_ipsum",
            QualityWarning::Policy => "policy",
            QualityWarning::JsWarning => "js_warning",
            QualityWarning::CurlyBracket => "curly_bracket",
            QualityWarning::AdultWords => "adult_words",
        }
    }
}

impl fmt::Display for QualityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QualityWarning {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QualityWarning::ALL
            .into_iter()
            .find(|w| w.name() == s)
            .ok_or_else(|| format!("unknown quality warning {s:?}"))
    }
}

impl serde::Serialize for QualityWarning {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> serde::Deserialize<'de> for QualityWarning {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Thresholds and word lists controlling the warning rules.
#[derive(Debug, Clone)]
pub struct FilterConfig {
    pub tiny_lines: usize,
    pub short_line_chars: usize,
    pub short_ratio: f64,
    pub lid_mismatch_ratio: f64,
    pub script_incompat_ratio: f64,
    pub listcase_ratio: f64,
    pub cjk_list_seg_chars: usize,
    pub technical_ratio: f64,
    pub rep_min_words: usize,
    pub rep_word_ratio: f64,
    pub rep_bigram_ratio: f64,
    pub long_word_chars: usize,
    pub cursed_patterns: Vec<Regex>,
    pub adult_terms: Vec<String>,
    pub policy_phrases: Vec<String>,
    /// Scripts written without spaces between words.
    pub boundary_less_scripts: BTreeSet<ScriptCode>,
}

fn default_boundary_less() -> BTreeSet<ScriptCode> {
    ["Hani", "Hira", "Kana", "Thai", "Laoo", "Khmr", "Mymr", "Tibt"]
        .into_iter()
        .map(|s| ScriptCode::new(s).unwrap())
        .collect()
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            tiny_lines: 3,
            short_line_chars: 100,
            short_ratio: 0.5,
            lid_mismatch_ratio: 0.6,
            script_incompat_ratio: 0.1,
            listcase_ratio: 0.5,
            cjk_list_seg_chars: 5,
            technical_ratio: 0.2,
            rep_min_words: 20,
            rep_word_ratio: 0.5,
            rep_bigram_ratio: 0.2,
            long_word_chars: 100,
            cursed_patterns: compile_patterns(&parse_list(DEFAULT_CURSED_PATTERNS))
                .expect("builtin cursed patterns compile"),
            adult_terms: parse_list(DEFAULT_ADULT_TERMS),
            policy_phrases: POLICY_PHRASES.iter().map(|p| p.to_string()).collect(),
            boundary_less_scripts: default_boundary_less(),
        }
    }
}

impl FilterConfig {
    /// Loads overrides from a `key = value` text file. Unknown keys are
    /// rejected. `cursed_patterns` and `adult_terms` take file paths resolved
    /// relative to the config file; `boundary_less_scripts` takes a
    /// comma-separated list of script codes.
    pub fn from_file(path: &Path) -> Result<Self, FilterError> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut cfg = FilterConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let bad = |message: String| FilterError::Config {
                line: lineno,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "tiny_lines" => cfg.tiny_lines = parse_num(key, value, lineno)?,
                "short_line_chars" => cfg.short_line_chars = parse_num(key, value, lineno)?,
                "short_ratio" => cfg.short_ratio = parse_num(key, value, lineno)?,
                "lid_mismatch_ratio" => cfg.lid_mismatch_ratio = parse_num(key, value, lineno)?,
                "script_incompat_ratio" => {
                    cfg.script_incompat_ratio = parse_num(key, value, lineno)?
                }
                "listcase_ratio" => cfg.listcase_ratio = parse_num(key, value, lineno)?,
                "cjk_list_seg_chars" => cfg.cjk_list_seg_chars = parse_num(key, value, lineno)?,
                "technical_ratio" => cfg.technical_ratio = parse_num(key, value, lineno)?,
                "rep_min_words" => cfg.rep_min_words = parse_num(key, value, lineno)?,
                "rep_word_ratio" => cfg.rep_word_ratio = parse_num(key, value, lineno)?,
                "rep_bigram_ratio" => cfg.rep_bigram_ratio = parse_num(key, value, lineno)?,
                "long_word_chars" => cfg.long_word_chars = parse_num(key, value, lineno)?,
                "cursed_patterns" => {
                    let text = std::fs::read_to_string(base.join(value))?;
                    cfg.cursed_patterns = compile_patterns(&parse_list(&text))?;
                }
                "adult_terms" => {
                    let text = std::fs::read_to_string(base.join(value))?;
                    cfg.adult_terms = parse_list(&text);
                }
                "boundary_less_scripts" => {
                    let mut set = BTreeSet::new();
                    for code in value.split(',') {
                        let code = code.trim();
                        set.insert(ScriptCode::new(code).map_err(|e| bad(e.to_string()))?);
                    }
                    cfg.boundary_less_scripts = set;
                }
                _ => return Err(bad(format!("unknown key {key:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), FilterError> {
        let ratios = [
            ("short_ratio", self.short_ratio),
            ("lid_mismatch_ratio", self.lid_mismatch_ratio),
            ("script_incompat_ratio", self.script_incompat_ratio),
            ("listcase_ratio", self.listcase_ratio),
            ("technical_ratio", self.technical_ratio),
            ("rep_word_ratio", self.rep_word_ratio),
            ("rep_bigram_ratio", self.rep_bigram_ratio),
        ];
        for (field, value) in ratios {
            if !(0.0..=1.0).contains(&value) || value.is_nan() {
                return Err(FilterError::RatioRange { field, value });
            }
        }
        Ok(())
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, FilterError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| FilterError::Config {
        line,
        message: format!("bad value for {key}: {e}"),
    })
}

/// Splits a list file into entries, dropping blank lines and `#` comments.
pub fn parse_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

pub fn compile_patterns(patterns: &[String]) -> Result<Vec<Regex>, FilterError> {
    patterns
        .iter()
        .map(|p| {
            Regex::new(p).map_err(|source| FilterError::Pattern {
                pattern: p.clone(),
                source,
            })
        })
        .collect()
}

/// Everything a warning rule may inspect about one document.
pub struct DocContext<'a> {
    pub lines: &'a [String],
    pub doc_label: LabelId,
    pub line_labels: &'a [Option<LabelId>],
    pub incompat_fraction: f64,
    /// Lines joined with `\n`, for substring and pattern rules.
    pub joined: String,
    pub joined_lower: String,
}

impl<'a> DocContext<'a> {
    pub fn new(
        lines: &'a [String],
        doc_label: LabelId,
        line_labels: &'a [Option<LabelId>],
        incompat_fraction: f64,
    ) -> Self {
        assert_eq!(
            lines.len(),
            line_labels.len(),
            "one line label per document line"
        );
        let joined = lines.join("\n");
        let joined_lower = joined.to_lowercase();
        DocContext {
            lines,
            doc_label,
            line_labels,
            incompat_fraction,
            joined,
            joined_lower,
        }
    }
}

/// A single warning detector. Implementations must be pure: the same context
/// and config always produce the same answer.
pub trait WarningRule: Send + Sync {
    fn warning(&self) -> QualityWarning;
    fn fires(&self, doc: &DocContext<'_>, cfg: &FilterConfig) -> bool;
}

/// An ordered collection of warning rules applied together.
pub struct RuleRegistry {
    rules: Vec<Box<dyn WarningRule>>,
}

impl RuleRegistry {
    pub fn empty() -> Self {
        RuleRegistry { rules: Vec::new() }
    }

    /// All sixteen standard rules.
    pub fn standard() -> Self {
        RuleRegistry {
            rules: rules::standard_rules(),
        }
    }

    pub fn register(&mut self, rule: Box<dyn WarningRule>) {
        self.rules.push(rule);
    }

    pub fn warnings(&self) -> Vec<QualityWarning> {
        self.rules.iter().map(|r| r.warning()).collect()
    }

    pub fn annotate(&self, doc: &DocContext<'_>, cfg: &FilterConfig) -> BTreeSet<QualityWarning> {
        self.rules
            .iter()
            .filter(|r| r.fires(doc, cfg))
            .map(|r| r.warning())
            .collect()
    }
}

static STANDARD: LazyLock<RuleRegistry> = LazyLock::new(RuleRegistry::standard);

/// Runs the standard rules over one document.
pub fn annotate(
    doc_lines: &[String],
    doc_label: LabelId,
    line_labels: &[Option<LabelId>],
    incompat_fraction: f64,
    cfg: &FilterConfig,
) -> BTreeSet<QualityWarning> {
    let doc = DocContext::new(doc_lines, doc_label, line_labels, incompat_fraction);
    STANDARD.annotate(&doc, cfg)
}

/// Warnings that do not cause a drop for a document with this label.
pub fn ignorable_warnings(label: LabelId, cfg: &FilterConfig) -> BTreeSet<QualityWarning> {
    let mut set = BTreeSet::from([
        QualityWarning::ShortSentences,
        QualityWarning::Header,
        QualityWarning::Footer,
    ]);
    if cfg.boundary_less_scripts.contains(&label.script()) {
        set.insert(QualityWarning::LongWord);
        set.insert(QualityWarning::Repetition);
    }
    set
}

/// Keep iff every fired warning is ignorable for this label.
pub fn decide_keep(
    warnings: &BTreeSet<QualityWarning>,
    label: LabelId,
    cfg: &FilterConfig,
) -> bool {
    warnings.is_subset(&ignorable_warnings(label, cfg))
}

/// Repeated-content fractions for one line: `1 - distinct/total` over words
/// and over word bigrams, both 0 when the denominator is 0.
pub fn repeated_fractions(line: &str) -> (f64, f64, usize) {
    let words: Vec<&str> = line.split_whitespace().collect();
    let total = words.len();
    if total == 0 {
        return (0.0, 0.0, 0);
    }
    let distinct: BTreeSet<&str> = words.iter().copied().collect();
    let word_fraction = 1.0 - distinct.len() as f64 / total as f64;
    let bigram_fraction = if total < 2 {
        0.0
    } else {
        let distinct_bigrams: BTreeSet<(&str, &str)> =
            words.windows(2).map(|w| (w[0], w[1])).collect();
        1.0 - distinct_bigrams.len() as f64 / (total - 1) as f64
    };
    (word_fraction, bigram_fraction, total)
}
