//! FastText-style softmax classifier over hashed character n-grams and word
//! unigrams, for open-set language identification.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::LabelId;

mod featurize;
mod io;
mod matrix;
pub mod math;
mod train;

pub use featurize::{featurize, hash_ngram, TOKEN_BEGIN, TOKEN_END};
pub use io::ModelIoError;
pub use matrix::Matrix;
pub use train::train;

#[derive(Debug, Error)]
pub enum LidError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("training corpus has no labels")]
    NoLabels,
    #[error("label {label} occurs {count} times, fewer than min_count_label={min}")]
    LabelBelowMinCount { label: LabelId, count: u64, min: u32 },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("word_ngrams={0} is not supported; only word unigrams (word_ngrams=1) are implemented")]
    UnsupportedWordNgrams(u32),
    #[error("constrained prediction got an empty allowed set")]
    EmptyAllowedSet,
    #[error("label {0} is not in the model vocabulary")]
    UnknownLabel(LabelId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Softmax,
}

/// Training hyperparameters. The defaults are the model family's standard
/// large-scale settings; desk-scale tests shrink `bucket`/`dim` for speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub min_count: u32,
    pub min_count_label: u32,
    pub word_ngrams: u32,
    pub bucket: u32,
    pub minn: u32,
    pub maxn: u32,
    pub loss: Loss,
    pub dim: u32,
    pub epoch: u32,
    pub lr: f32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            min_count: 1000,
            min_count_label: 0,
            word_ngrams: 1,
            bucket: 1_000_000,
            minn: 2,
            maxn: 5,
            loss: Loss::Softmax,
            dim: 256,
            epoch: 1,
            lr: 0.8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LidError> {
        if self.word_ngrams != 1 {
            return Err(LidError::UnsupportedWordNgrams(self.word_ngrams));
        }
        if self.minn < 1 || self.minn > self.maxn {
            return Err(LidError::Config(format!(
                "need 1 <= minn <= maxn, got minn={} maxn={}",
                self.minn, self.maxn
            )));
        }
        if self.bucket < 1 {
            return Err(LidError::Config("bucket must be >= 1".into()));
        }
        if self.dim < 1 {
            return Err(LidError::Config("dim must be >= 1".into()));
        }
        if !(self.lr > 0.0) {
            return Err(LidError::Config(format!("lr must be > 0, got {}", self.lr)));
        }
        if self.epoch < 1 {
            return Err(LidError::Config("epoch must be >= 1".into()));
        }
        Ok(())
    }
}

/// Dense word and label index spaces: word ids are `0..n_words`, label ids
/// `0..n_labels`, both in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    word_index: HashMap<String, u32>,
    labels: Vec<LabelId>,
    label_index: HashMap<LabelId, u32>,
}

impl Vocabulary {
    pub fn push_word(&mut self, word: String) -> u32 {
        debug_assert!(!self.word_index.contains_key(&word), "duplicate word {word}");
        let id = self.words.len() as u32;
        self.word_index.insert(word.clone(), id);
        self.words.push(word);
        id
    }

    pub fn push_label(&mut self, label: LabelId) -> u32 {
        debug_assert!(!self.label_index.contains_key(&label), "duplicate label {label}");
        let id = self.labels.len() as u32;
        self.label_index.insert(label, id);
        self.labels.push(label);
        id
    }

    pub fn word_id(&self, word: &str) -> Option<u32> {
        self.word_index.get(word).copied()
    }

    pub fn label_id(&self, label: &LabelId) -> Option<u32> {
        self.label_index.get(label).copied()
    }

    pub fn n_words(&self) -> usize {
        self.words.len()
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn labels(&self) -> &[LabelId] {
        &self.labels
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: LabelId,
    pub probability: f64,
}

/// A trained classifier: input embeddings for `n_words + bucket` feature ids,
/// one output row per label.
#[derive(Debug, Clone, PartialEq)]
pub struct LidModel {
    config: TrainConfig,
    vocab: Vocabulary,
    input: Matrix<f32>,
    output: Matrix<f32>,
}

impl LidModel {
    pub(crate) fn from_parts(
        config: TrainConfig,
        vocab: Vocabulary,
        input: Matrix<f32>,
        output: Matrix<f32>,
    ) -> Self {
        debug_assert_eq!(input.rows(), vocab.n_words() + config.bucket as usize);
        debug_assert_eq!(output.rows(), vocab.n_labels());
        Self { config, vocab, input, output }
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn labels(&self) -> &[LabelId] {
        self.vocab.labels()
    }

    pub fn features(&self, text: &str) -> Vec<u32> {
        featurize(text, &self.config, &self.vocab)
    }

    /// Top-`k` predictions, sorted by probability descending with ties broken
    /// by label order. `None` when the text yields no features (empty or
    /// whitespace-only input has no mean embedding).
    pub fn predict(&self, text: &str, k: usize) -> Option<Vec<Prediction>> {
        assert!(k >= 1, "k must be >= 1");
        let features = self.features(text);
        if features.is_empty() {
            return None;
        }
        let h = math::hidden(&self.input, &features);
        let raw = math::scores(&self.output, &h);
        let mut probs: Vec<f64> = raw.iter().map(|&s| s as f64).collect();
        math::softmax(&mut probs);
        let mut ranked: Vec<Prediction> = probs
            .iter()
            .enumerate()
            .map(|(i, &p)| Prediction { label: self.vocab.labels()[i], probability: p })
            .collect();
        sort_predictions(&mut ranked);
        ranked.truncate(k);
        Some(ranked)
    }

    /// Like [`predict`](Self::predict) but with the softmax restricted to
    /// `allowed`; probabilities over `allowed` sum to 1.
    pub fn predict_constrained(
        &self,
        text: &str,
        allowed: &BTreeSet<LabelId>,
    ) -> Result<Option<Vec<Prediction>>, LidError> {
        if allowed.is_empty() {
            return Err(LidError::EmptyAllowedSet);
        }
        let mut indices = Vec::with_capacity(allowed.len());
        for label in allowed {
            match self.vocab.label_id(label) {
                Some(i) => indices.push(i as usize),
                None => return Err(LidError::UnknownLabel(*label)),
            }
        }
        let features = self.features(text);
        if features.is_empty() {
            return Ok(None);
        }
        let h = math::hidden(&self.input, &features);
        let mut probs: Vec<f64> =
            indices.iter().map(|&i| self.output.dot_row(i, &h) as f64).collect();
        math::softmax(&mut probs);
        let mut ranked: Vec<Prediction> = probs
            .iter()
            .zip(&indices)
            .map(|(&p, &i)| Prediction { label: self.vocab.labels()[i], probability: p })
            .collect();
        sort_predictions(&mut ranked);
        Ok(Some(ranked))
    }

    pub(crate) fn input_matrix(&self) -> &Matrix<f32> {
        &self.input
    }

    pub(crate) fn output_matrix(&self) -> &Matrix<f32> {
        &self.output
    }
}

fn sort_predictions(preds: &mut [Prediction]) {
    preds.sort_by(|a, b| {
        b.probability
            .partial_cmp(&a.probability)
            .expect("probabilities are finite")
            .then_with(|| a.label.cmp(&b.label))
    });
}
