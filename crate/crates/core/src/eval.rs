//! F1/FPR evaluation with constrained predictions, benchmark sampling, and
//! word-4-gram contamination filtering.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::corpus::LabeledSentence;
use crate::label::LabelId;
use crate::lid::{LidError, LidModel};

/// Default per-label benchmark cap: min(1000, n_l) sentences per label.
pub const DEFAULT_SAMPLE_CAP: usize = 1000;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("benchmark is empty")]
    EmptyBenchmark,
    #[error("benchmark and model share no labels")]
    NoSharedLabels,
    #[error(transparent)]
    Lid(#[from] LidError),
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LabelMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fpr: f64,
}

/// Per-label and macro-averaged scores over a benchmark.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EvalResult {
    pub per_label: BTreeMap<LabelId, LabelMetrics>,
    pub macro_f1: f64,
    pub macro_fpr: f64,
    /// Gold sentence count per label.
    pub n_l: BTreeMap<LabelId, usize>,
}

impl EvalResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("eval result serializes")
    }

    /// Aligned text table, hardest labels (lowest F1) first.
    pub fn render_table(&self) -> String {
        let mut rows: Vec<(&LabelId, &LabelMetrics)> = self.per_label.iter().collect();
        rows.sort_by(|(la, ma), (lb, mb)| {
            ma.f1.partial_cmp(&mb.f1).unwrap().then_with(|| la.cmp(lb))
        });
        let mut out = String::new();
        writeln!(
            out,
            "{:<12} {:>7} {:>10} {:>10} {:>10} {:>10}",
            "label", "n", "precision", "recall", "f1", "fpr"
        )
        .unwrap();
        for (label, m) in rows {
            writeln!(
                out,
                "{:<12} {:>7} {:>10.4} {:>10.4} {:>10.4} {:>10.6}",
                label.to_string(),
                self.n_l.get(label).copied().unwrap_or(0),
                m.precision,
                m.recall,
                m.f1,
                m.fpr
            )
            .unwrap();
        }
        writeln!(
            out,
            "{:<12} {:>7} {:>10} {:>10} {:>10.4} {:>10.6}",
            "macro",
            self.n_l.values().sum::<usize>(),
            "",
            "",
            self.macro_f1,
            self.macro_fpr
        )
        .unwrap();
        out
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores a list of (gold, predicted) pairs. Labels are the gold labels;
/// macro averages include gold labels the predictor never chose (F1 = 0).
/// FPR(l) is false positives for l over gold sentences that are not l.
pub fn metrics_from_pairs(pairs: &[(LabelId, Option<LabelId>)]) -> EvalResult {
    let mut n_l: BTreeMap<LabelId, usize> = BTreeMap::new();
    for (gold, _) in pairs {
        *n_l.entry(*gold).or_default() += 1;
    }
    let mut tp: BTreeMap<LabelId, usize> = BTreeMap::new();
    let mut fp: BTreeMap<LabelId, usize> = BTreeMap::new();
    for (gold, pred) in pairs {
        if let Some(pred) = pred {
            if pred == gold {
                *tp.entry(*gold).or_default() += 1;
            } else {
                *fp.entry(*pred).or_default() += 1;
            }
        }
    }

    let total = pairs.len();
    let mut per_label = BTreeMap::new();
    let (mut f1_sum, mut fpr_sum) = (0.0, 0.0);
    for (&label, &gold_count) in &n_l {
        let tp = tp.get(&label).copied().unwrap_or(0);
        let fp = fp.get(&label).copied().unwrap_or(0);
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, gold_count);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let fpr = ratio(fp, total - gold_count);
        per_label.insert(
            label,
            LabelMetrics {
                precision,
                recall,
                f1,
                fpr,
            },
        );
        f1_sum += f1;
        fpr_sum += fpr;
    }
    let k = per_label.len() as f64;
    EvalResult {
        per_label,
        macro_f1: if k == 0.0 { 0.0 } else { f1_sum / k },
        macro_fpr: if k == 0.0 { 0.0 } else { fpr_sum / k },
        n_l,
    }
}

/// Evaluates a model on a benchmark, restricting predictions to labels that
/// occur in both the benchmark and the model.
pub fn evaluate(model: &LidModel, benchmark: &[LabeledSentence]) -> Result<EvalResult, EvalError> {
    if benchmark.is_empty() {
        return Err(EvalError::EmptyBenchmark);
    }
    let gold_labels: BTreeSet<LabelId> = benchmark.iter().map(|s| s.label).collect();
    let model_labels: BTreeSet<LabelId> = model.labels().iter().copied().collect();
    let allowed: BTreeSet<LabelId> = gold_labels.intersection(&model_labels).copied().collect();
    if allowed.is_empty() {
        return Err(EvalError::NoSharedLabels);
    }
    let mut pairs = Vec::with_capacity(benchmark.len());
    for sentence in benchmark {
        let top = model
            .predict_constrained(&sentence.text, &allowed)?
            .and_then(|preds| preds.first().map(|p| p.label));
        pairs.push((sentence.label, top));
    }
    Ok(metrics_from_pairs(&pairs))
}

fn word_ngrams(sentence: &str) -> Vec<Vec<&str>> {
    let words: Vec<&str> = sentence.split_whitespace().collect();
    if words.len() < 4 {
        return Vec::new();
    }
    words.windows(4).map(|w| w.to_vec()).collect()
}

/// Flags each benchmark sentence that leaks from the corpus: all of its word
/// 4-grams occur within a single corpus sentence. Sentences with fewer than
/// four words are flagged when they appear verbatim inside some corpus
/// sentence. Words are whitespace tokens, case-sensitive, punctuation kept.
pub fn contamination_mask(benchmark: &[String], corpus: &[String]) -> Vec<bool> {
    // Inverted index: 4-gram -> ids of corpus sentences containing it.
    let mut index: HashMap<Vec<&str>, Vec<usize>> = HashMap::new();
    for (id, sentence) in corpus.iter().enumerate() {
        for gram in word_ngrams(sentence) {
            let ids = index.entry(gram).or_default();
            if ids.last() != Some(&id) {
                ids.push(id);
            }
        }
    }

    benchmark
        .iter()
        .map(|sentence| {
            let grams = word_ngrams(sentence);
            if grams.is_empty() {
                return corpus.iter().any(|c| c.contains(sentence.as_str()));
            }
            // Intersect the posting lists; any surviving id is one corpus
            // sentence holding every 4-gram.
            let mut survivors: Option<Vec<usize>> = None;
            for gram in &grams {
                let Some(ids) = index.get(gram) else {
                    return false;
                };
                survivors = Some(match survivors {
                    None => ids.clone(),
                    Some(prev) => {
                        let keep: Vec<usize> =
                            prev.into_iter().filter(|id| ids.contains(id)).collect();
                        if keep.is_empty() {
                            return false;
                        }
                        keep
                    }
                });
            }
            survivors.is_some_and(|ids| !ids.is_empty())
        })
        .collect()
}

/// Per-label uniform sample of min(cap, n_l) sentences without replacement.
pub fn build_test_sample(
    corpus_test: &[LabeledSentence],
    cap: usize,
    seed: u64,
) -> Vec<LabeledSentence> {
    assert!(cap >= 1, "cap must be at least 1");
    let mut by_label: BTreeMap<LabelId, Vec<usize>> = BTreeMap::new();
    for (i, s) in corpus_test.iter().enumerate() {
        by_label.entry(s.label).or_default().push(i);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut picked = Vec::new();
    for (_, mut indices) in by_label {
        let take = cap.min(indices.len());
        indices.shuffle(&mut rng);
        let mut chosen: Vec<usize> = indices.into_iter().take(take).collect();
        chosen.sort_unstable();
        picked.extend(chosen);
    }
    picked
        .into_iter()
        .map(|i| corpus_test[i].clone())
        .collect()
}

/// Stratified 0.8/0.1/0.1 split: per label, exactly floor(0.8 n) train and
/// floor(0.1 n) valid, remainder test.
pub fn split_corpus(
    corpus: &[LabeledSentence],
    seed: u64,
) -> (
    Vec<LabeledSentence>,
    Vec<LabeledSentence>,
    Vec<LabeledSentence>,
) {
    let mut by_label: BTreeMap<LabelId, Vec<usize>> = BTreeMap::new();
    for (i, s) in corpus.iter().enumerate() {
        by_label.entry(s.label).or_default().push(i);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (mut train_ids, mut valid_ids, mut test_ids) = (Vec::new(), Vec::new(), Vec::new());
    for (_, mut indices) in by_label {
        let n = indices.len();
        let n_train = n * 8 / 10;
        let n_valid = n / 10;
        indices.shuffle(&mut rng);
        train_ids.extend(indices[..n_train].iter().copied());
        valid_ids.extend(indices[n_train..n_train + n_valid].iter().copied());
        test_ids.extend(indices[n_train + n_valid..].iter().copied());
    }
    let collect = |mut ids: Vec<usize>| -> Vec<LabeledSentence> {
        ids.sort_unstable();
        ids.into_iter().map(|i| corpus[i].clone()).collect()
    };
    (collect(train_ids), collect(valid_ids), collect(test_ids))
}
