//! Text → feature ids: word unigram indices plus hashed character n-grams.

use super::{TrainConfig, Vocabulary};

/// Marks the start of a token before n-gram extraction, so edge n-grams are
/// distinct features from interior ones.
pub const TOKEN_BEGIN: char = '\u{27e8}'; // ⟨
/// Marks the end of a token before n-gram extraction.
pub const TOKEN_END: char = '\u{27e9}'; // ⟩

/// 32-bit FNV-1a over the n-gram's UTF-8 bytes.
pub fn hash_ngram(ngram: &str) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for &b in ngram.as_bytes() {
        h ^= u32::from(b);
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}

/// Feature ids for `text`: first the vocabulary indices of its whitespace
/// tokens (in token order, vocabulary hits only), then for every token the
/// hashed character n-grams of the sentinel-wrapped token, `minn..=maxn`
/// characters, mapped into `|words| + (hash mod bucket)`.
pub fn featurize(text: &str, config: &TrainConfig, vocab: &Vocabulary) -> Vec<u32> {
    let n_words = vocab.n_words() as u32;
    let mut features = Vec::new();
    for token in text.split_whitespace() {
        if let Some(id) = vocab.word_id(token) {
            features.push(id);
        }
    }
    let mut wrapped = String::new();
    for token in text.split_whitespace() {
        wrapped.clear();
        wrapped.push(TOKEN_BEGIN);
        wrapped.push_str(token);
        wrapped.push(TOKEN_END);
        push_ngram_ids(&wrapped, config, n_words, &mut features);
    }
    features
}

fn push_ngram_ids(wrapped: &str, config: &TrainConfig, n_words: u32, out: &mut Vec<u32>) {
    let starts: Vec<usize> = wrapped
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(wrapped.len()))
        .collect();
    let n_chars = starts.len() - 1;
    for i in 0..n_chars {
        let lo = config.minn as usize;
        let hi = (config.maxn as usize).min(n_chars - i);
        for n in lo..=hi {
            let ngram = &wrapped[starts[i]..starts[i + n]];
            out.push(n_words + hash_ngram(ngram) % config.bucket);
        }
    }
}
