//! Synthetic sentences in ten natural languages, built from bundled
//! wordlists (drawn from the MIT-licensed stopwords-iso collection).
//!
//! The sentences are word salad, not grammatical text, but they carry each
//! language's characteristic orthography and function words, which is what a
//! character-n-gram identifier learns from. Enough to train and evaluate a
//! small model without shipping corpus data.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::corpus::LabeledSentence;
use crate::label::LabelId;

static WORDLISTS: [(&str, &str); 10] = [
    ("arb_Arab", include_str!("../data/wordlists/arb_Arab.txt")),
    ("cmn_Hani", include_str!("../data/wordlists/cmn_Hani.txt")),
    ("deu_Latn", include_str!("../data/wordlists/deu_Latn.txt")),
    ("ell_Grek", include_str!("../data/wordlists/ell_Grek.txt")),
    ("eng_Latn", include_str!("../data/wordlists/eng_Latn.txt")),
    ("fra_Latn", include_str!("../data/wordlists/fra_Latn.txt")),
    ("hin_Deva", include_str!("../data/wordlists/hin_Deva.txt")),
    ("ita_Latn", include_str!("../data/wordlists/ita_Latn.txt")),
    ("rus_Cyrl", include_str!("../data/wordlists/rus_Cyrl.txt")),
    ("spa_Latn", include_str!("../data/wordlists/spa_Latn.txt")),
];

const WORDS_PER_SENTENCE: (usize, usize) = (3, 12);

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("no bundled wordlist for {0}")]
    UnknownLanguage(LabelId),
}

/// Labels with a bundled wordlist.
pub fn sample_languages() -> Vec<LabelId> {
    WORDLISTS.iter().map(|(l, _)| l.parse().unwrap()).collect()
}

fn wordlist(label: LabelId) -> Option<Vec<&'static str>> {
    let name = label.to_string();
    WORDLISTS
        .iter()
        .find(|(l, _)| *l == name)
        .map(|(_, text)| text.lines().filter(|l| !l.is_empty()).collect())
}

/// Generates `n` labeled sentences for one of the bundled languages.
pub fn gen_sentences(
    label: LabelId,
    n: usize,
    seed: u64,
) -> Result<Vec<LabeledSentence>, SampleError> {
    let words = wordlist(label).ok_or(SampleError::UnknownLanguage(label))?;
    // Han is the one bundled script written without spaces between words.
    let separator = if label.script().as_str() == "Hani" {
        ""
    } else {
        " "
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let count_dist = Uniform::new_inclusive(WORDS_PER_SENTENCE.0, WORDS_PER_SENTENCE.1);
    let word_dist = Uniform::new(0, words.len());
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let count = count_dist.sample(&mut rng);
        let text = (0..count)
            .map(|_| words[word_dist.sample(&mut rng)])
            .collect::<Vec<_>>()
            .join(separator);
        out.push(LabeledSentence { label, text });
    }
    Ok(out)
}
