//! The sixteen standard warning rules.

use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use super::{repeated_fractions, DocContext, FilterConfig, QualityWarning, WarningRule};

pub(super) fn standard_rules() -> Vec<Box<dyn WarningRule>> {
    vec![
        Box::new(Tiny),
        Box::new(ShortSentences),
        Box::new(Header),
        Box::new(Footer),
        Box::new(LidInconsistent),
        Box::new(ScriptInconsistent),
        Box::new(ListCase),
        Box::new(TechnicalChars),
        Box::new(CursedRegex),
        Box::new(Repetition),
        Box::new(LongWord),
        Box::new(LoremIpsum),
        Box::new(Policy),
        Box::new(JsWarning),
        Box::new(CurlyBracket),
        Box::new(AdultWords),
    ]
}

fn is_short(line: &str, cfg: &FilterConfig) -> bool {
    line.chars().count() < cfg.short_line_chars
}

/// First or last 20% of lines, rounded up, at least one line.
fn edge_region(n_lines: usize) -> usize {
    n_lines.div_ceil(5).max(1)
}

struct Tiny;

impl WarningRule for Tiny {
    fn warning(&self) -> QualityWarning {
        QualityWarning::Tiny
    }
    fn fires(&self, doc: &DocContext<'_>, cfg: &FilterConfig) -> bool {
        doc.lines.len() < cfg.tiny_lines
    }
}

struct ShortSentences;

impl WarningRule for ShortSentences {
    fn warning(&self) -> QualityWarning {
        QualityWarning::ShortSentences
    }
    fn fires(&self, doc: &DocContext<'_>, cfg: &FilterConfig) -> bool {
        if doc.lines.is_empty() {
            return false;
        }
        let short = doc.lines.iter().filter(|l| is_short(l, cfg)).count();
        short as f64 / doc.lines.len() as f64 >= cfg.short_ratio
    }
}

struct Header;

impl WarningRule for Header {
    fn warning(&self) -> QualityWarning {
        QualityWarning::Header
    }
    fn fires(&self, doc: &DocContext<'_>, cfg: &FilterConfig) -> bool {
        if doc.lines.is_empty() {
            return false;
        }
        let k = edge_region(doc.lines.len());
        doc.lines[..k].iter().all(|l| is_short(l, cfg))
    }
}

struct Footer;

impl WarningRule for Footer {
    fn warning(&self) -> QualityWarning {
        QualityWarning::Footer
    }
    fn fires(&self, doc: &DocContext<'_>, cfg: &FilterConfig) -> bool {
        if doc.lines.is_empty() {
            return false;
        }
        let k = edge_region(doc.lines.len());
        doc.lines[doc.lines.len() - k..]
            .iter()
            .all(|l| is_short(l, cfg))
    }
}

struct LidInconsistent;

impl WarningRule for LidInconsistent {
    fn warning(&self) -> QualityWarning {
        QualityWarning::LidInconsistent
    }
    fn fires(&self, doc: &DocContext<'_>, cfg: &FilterConfig) -> bool {
        if doc.line_labels.is_empty() {
            return false;
        }
        let mismatched = doc
            .line_labels
            .iter()
            .filter(|l| **l != Some(doc.doc_label))
            .count();
        mismatched as f64 / doc.line_labels.len() as f64 >= cfg.lid_mismatch_ratio
    }
}

struct ScriptInconsistent;

impl WarningRule for ScriptInconsistent {
    fn warning(&self) -> QualityWarning {
        QualityWarning::ScriptInconsistent
    }
    fn fires(&self, doc: &DocContext<'_>, cfg: &FilterConfig) -> bool {
        doc.incompat_fraction >= cfg.script_incompat_ratio
    }
}

fn capital_initial(token: &str) -> bool {
    token
        .chars()
        .find(|c| c.is_uppercase() || c.is_lowercase())
        .is_some_and(|c| c.is_uppercase())
}

struct ListCase;

impl WarningRule for ListCase {
    fn warning(&self) -> QualityWarning {
        QualityWarning::ListCase
    }
    fn fires(&self, doc: &DocContext<'_>, cfg: &FilterConfig) -> bool {
        let capital_listy = doc.lines.iter().any(|line| {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                return false;
            }
            let capitals = tokens.iter().filter(|t| capital_initial(t)).count();
            capitals as f64 / tokens.len() as f64 >= cfg.listcase_ratio
        });
        if capital_listy {
            return true;
        }
        // Capitalization says nothing in space-free scripts; there the signal
        // is a run of short space-surrounded segments.
        if !cfg
            .boundary_less_scripts
            .contains(&doc.doc_label.script())
        {
            return false;
        }
        doc.lines.iter().any(|line| {
            let segments: Vec<&str> = line.split_whitespace().collect();
            if segments.is_empty() {
                return false;
            }
            let short = segments
                .iter()
                .filter(|s| s.chars().count() < cfg.cjk_list_seg_chars)
                .count();
            short as f64 / segments.len() as f64 >= cfg.listcase_ratio
        })
    }
}

struct TechnicalChars;

impl WarningRule for TechnicalChars {
    fn warning(&self) -> QualityWarning {
        QualityWarning::TechnicalChars
    }
    fn fires(&self, doc: &DocContext<'_>, cfg: &FilterConfig) -> bool {
        let mut technical = 0usize;
        let mut total = 0usize;
        for c in doc.joined.chars() {
            if c.is_whitespace() {
                continue;
            }
            total += 1;
            let group = c.general_category_group();
            if group == GeneralCategoryGroup::Number || group == GeneralCategoryGroup::Punctuation {
                technical += 1;
            }
        }
        total > 0 && technical as f64 / total as f64 >= cfg.technical_ratio
    }
}

struct CursedRegex;

impl WarningRule for CursedRegex {
    fn warning(&self) -> QualityWarning {
        QualityWarning::CursedRegex
    }
    fn fires(&self, doc: &DocContext<'_>, cfg: &FilterConfig) -> bool {
        cfg.cursed_patterns.iter().any(|p| p.is_match(&doc.joined))
    }
}

struct Repetition;

impl WarningRule for Repetition {
    fn warning(&self) -> QualityWarning {
        QualityWarning::Repetition
    }
    fn fires(&self, doc: &DocContext<'_>, cfg: &FilterConfig) -> bool {
        doc.lines.iter().any(|line| {
            let (word_frac, bigram_frac, words) = repeated_fractions(line);
            words > cfg.rep_min_words
                && (word_frac > cfg.rep_word_ratio || bigram_frac > cfg.rep_bigram_ratio)
        })
    }
}

struct LongWord;

impl WarningRule for LongWord {
    fn warning(&self) -> QualityWarning {
        QualityWarning::LongWord
    }
    fn fires(&self, doc: &DocContext<'_>, cfg: &FilterConfig) -> bool {
        doc.lines.iter().any(|line| {
            line.split_whitespace()
                .any(|t| t.chars().count() > cfg.long_word_chars)
        })
    }
}

struct LoremIpsum;

impl WarningRule for LoremIpsum {
    fn warning(&self) -> QualityWarning {
        QualityWarning::LoremIpsum
    }
    fn fires(&self, doc: &DocContext<'_>, _: &FilterConfig) -> bool {
        doc.joined_lower.contains("lorem ipsum")
    }
}

struct Policy;

impl WarningRule for Policy {
    fn warning(&self) -> QualityWarning {
        QualityWarning::Policy
    }
    fn fires(&self, doc: &DocContext<'_>, cfg: &FilterConfig) -> bool {
        cfg.policy_phrases
            .iter()
            .any(|p| doc.joined_lower.contains(&p.to_lowercase()))
    }
}

struct JsWarning;

impl WarningRule for JsWarning {
    fn warning(&self) -> QualityWarning {
        QualityWarning::JsWarning
    }
    fn fires(&self, doc: &DocContext<'_>, _: &FilterConfig) -> bool {
        doc.joined.contains("JavaScript") || doc.joined.contains("Javascript")
    }
}

struct CurlyBracket;

impl WarningRule for CurlyBracket {
    fn warning(&self) -> QualityWarning {
        QualityWarning::CurlyBracket
    }
    fn fires(&self, doc: &DocContext<'_>, _: &FilterConfig) -> bool {
        doc.joined.contains('{') || doc.joined.contains('}')
    }
}

struct AdultWords;

impl WarningRule for AdultWords {
    fn warning(&self) -> QualityWarning {
        QualityWarning::AdultWords
    }
    fn fires(&self, doc: &DocContext<'_>, cfg: &FilterConfig) -> bool {
        // Deliberately case-sensitive, unlike the phrase rules above: the
        // term lists carry inflected lowercase forms.
        cfg.adult_terms.iter().any(|t| doc.joined.contains(t))
    }
}
