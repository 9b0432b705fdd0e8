//! Single-threaded SGD training with a linearly decaying learning rate.

use std::collections::{BTreeMap, HashMap};

use rand::distributions::Uniform;
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use crate::corpus::LabeledSentence;
use crate::label::LabelId;

use super::matrix::Matrix;
use super::{featurize, math, LidError, LidModel, TrainConfig, Vocabulary};

/// How many processed tokens between learning-rate recomputations.
const LR_UPDATE_TOKENS: u64 = 64;

/// Trains a model on `corpus`. Deterministic for a given seed: the word
/// vocabulary is ordered by (count desc, word asc), labels lexicographically,
/// and all updates run on one thread in shuffled-but-seeded order.
pub fn train(corpus: &[LabeledSentence], config: &TrainConfig, seed: u64) -> Result<LidModel, LidError> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(LidError::EmptyCorpus);
    }

    let mut word_counts: HashMap<&str, u64> = HashMap::new();
    let mut label_counts: BTreeMap<LabelId, u64> = BTreeMap::new();
    for example in corpus {
        for token in example.text.split_whitespace() {
            *word_counts.entry(token).or_default() += 1;
        }
        *label_counts.entry(example.label).or_default() += 1;
    }
    if label_counts.is_empty() {
        return Err(LidError::NoLabels);
    }
    for (&label, &count) in &label_counts {
        if count < u64::from(config.min_count_label) {
            return Err(LidError::LabelBelowMinCount { label, count, min: config.min_count_label });
        }
    }

    let mut vocab = Vocabulary::default();
    let mut kept: Vec<(&str, u64)> = word_counts
        .iter()
        .filter(|&(_, &c)| c >= u64::from(config.min_count))
        .map(|(&w, &c)| (w, c))
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    for (word, _) in kept {
        vocab.push_word(word.to_string());
    }
    for &label in label_counts.keys() {
        vocab.push_label(label);
    }

    let features: Vec<Vec<u32>> =
        corpus.iter().map(|ex| featurize(&ex.text, config, &vocab)).collect();
    let targets: Vec<usize> = corpus
        .iter()
        .map(|ex| vocab.label_id(&ex.label).expect("label was counted") as usize)
        .collect();
    // Every example advances the schedule by at least one token so that
    // feature-less lines still move the decay forward.
    let token_counts: Vec<u64> =
        corpus.iter().map(|ex| ex.text.split_whitespace().count().max(1) as u64).collect();
    let total_tokens: u64 = token_counts.iter().sum::<u64>() * u64::from(config.epoch);

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dim = config.dim as usize;
    let n_rows = vocab.n_words() + config.bucket as usize;
    let bound = 1.0f32 / config.dim as f32;
    let init = Uniform::new(-bound, bound);
    let mut input = Matrix::zeros(n_rows, dim);
    for slot in input.data_mut() {
        *slot = rng.sample(init);
    }
    let mut output = Matrix::zeros(vocab.n_labels(), dim);

    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut processed: u64 = 0;
    let mut pending: u64 = 0;
    let mut current_lr = config.lr;
    for _ in 0..config.epoch {
        order.shuffle(&mut rng);
        for &i in &order {
            pending += token_counts[i];
            if pending >= LR_UPDATE_TOKENS {
                processed += pending;
                pending = 0;
                let progress = processed as f64 / total_tokens as f64;
                current_lr = config.lr * (1.0 - progress) as f32;
            }
            if !features[i].is_empty() && current_lr > 0.0 {
                math::sgd_step(&mut input, &mut output, &features[i], targets[i], current_lr);
            }
        }
    }

    Ok(LidModel::from_parts(config.clone(), vocab, input, output))
}
