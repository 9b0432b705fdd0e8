//! The six zxx noise generators.

use std::sync::LazyLock;

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use crate::corpus::LabeledSentence;
use crate::label::LabelId;

use super::und::TOKENS_PER_SENTENCE;
use super::{NoiseKind, SentenceGenerator, SynthError};

/// 1- and 2-grams over {i, j, l}: the token inventory of text extracted from
/// PDFs whose glyphs did not survive.
const PDF_TOKENS: [&str; 12] =
    ["i", "j", "l", "ii", "ij", "il", "ji", "jj", "jl", "li", "lj", "ll"];

static MOJIBAKE_LATIN: LazyLock<Vec<char>> =
    LazyLock::new(|| alphabet_from(include_str!("../../data/mojibake_latin.txt")));
static MOJIBAKE_ARABIC: LazyLock<Vec<char>> =
    LazyLock::new(|| alphabet_from(include_str!("../../data/mojibake_arabic.txt")));

fn alphabet_from(data: &str) -> Vec<char> {
    data.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .flat_map(str::chars)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZxxOptions {
    /// Tokens per generated sentence (kinds that build sentences from tokens).
    pub tokens_per_sentence: (u32, u32),
    /// Characters per token for alphabet-driven kinds.
    pub token_len: (u32, u32),
    /// Per-character replacement probability for `replacement_char`.
    pub replacement_rate: f64,
    /// Raw block size in bytes for `binary`.
    pub binary_block_bytes: (u32, u32),
}

impl Default for ZxxOptions {
    fn default() -> Self {
        Self {
            tokens_per_sentence: TOKENS_PER_SENTENCE,
            token_len: (1, 12),
            replacement_rate: 0.5,
            binary_block_bytes: (60, 240),
        }
    }
}

impl ZxxOptions {
    fn validate(&self) -> Result<(), SynthError> {
        let ranges = [
            ("tokens_per_sentence", self.tokens_per_sentence),
            ("token_len", self.token_len),
            ("binary_block_bytes", self.binary_block_bytes),
        ];
        for (name, (lo, hi)) in ranges {
            if lo < 1 || lo > hi {
                return Err(SynthError::Params(format!("{name} range {lo}..={hi} is invalid")));
            }
        }
        if !(0.0..=1.0).contains(&self.replacement_rate) {
            return Err(SynthError::Params(format!(
                "replacement_rate {} outside [0, 1]",
                self.replacement_rate
            )));
        }
        Ok(())
    }
}

pub struct ZxxGenerator {
    kind: NoiseKind,
    options: ZxxOptions,
}

impl ZxxGenerator {
    pub fn new(kind: NoiseKind, options: ZxxOptions) -> Self {
        Self { kind, options }
    }
}

impl SentenceGenerator for ZxxGenerator {
    fn name(&self) -> String {
        self.kind.name().to_string()
    }

    fn label(&self) -> LabelId {
        self.kind.label()
    }

    fn needs_carrier(&self) -> bool {
        self.kind.needs_carrier()
    }

    fn generate(
        &self,
        n: usize,
        seed: u64,
        carrier: Option<&[String]>,
    ) -> Result<Vec<LabeledSentence>, SynthError> {
        gen_zxx_with(self.kind, n, seed, carrier, &self.options)
    }
}

/// Noise sentences of the given kind with default options.
pub fn gen_zxx(
    kind: NoiseKind,
    n_sentences: usize,
    seed: u64,
    carrier: Option<&[String]>,
) -> Result<Vec<LabeledSentence>, SynthError> {
    gen_zxx_with(kind, n_sentences, seed, carrier, &ZxxOptions::default())
}

pub fn gen_zxx_with(
    kind: NoiseKind,
    n_sentences: usize,
    seed: u64,
    carrier: Option<&[String]>,
    options: &ZxxOptions,
) -> Result<Vec<LabeledSentence>, SynthError> {
    options.validate()?;
    let carrier = match (kind.needs_carrier(), carrier) {
        (true, Some(texts)) if !texts.is_empty() => Some(texts),
        (true, _) => return Err(SynthError::MissingCarrier(kind.name())),
        (false, _) => None,
    };
    let label = kind.label();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_sentences);
    for i in 0..n_sentences {
        let text = match kind {
            NoiseKind::MisrenderedPdf => token_sentence(&mut rng, options, |rng, _| {
                PDF_TOKENS[rng.gen_range(0..PDF_TOKENS.len())].to_string()
            }),
            NoiseKind::Antspeak => {
                space_out(&carrier.unwrap()[i % carrier.unwrap().len()])
            }
            NoiseKind::Binary => binary_block(&mut rng, options),
            NoiseKind::MojibakeLatin => token_sentence(&mut rng, options, |rng, _| {
                repeated_unit(rng, &MOJIBAKE_LATIN)
            }),
            NoiseKind::MojibakeArabic => token_sentence(&mut rng, options, |rng, opts| {
                let len = rng.gen_range(opts.token_len.0..=opts.token_len.1);
                (0..len).map(|_| MOJIBAKE_ARABIC[rng.gen_range(0..MOJIBAKE_ARABIC.len())]).collect()
            }),
            NoiseKind::ReplacementChar => {
                let source = &carrier.unwrap()[i % carrier.unwrap().len()];
                source
                    .chars()
                    .map(|c| if rng.gen_bool(options.replacement_rate) { '\u{fffd}' } else { c })
                    .collect()
            }
        };
        out.push(LabeledSentence::new(label, text));
    }
    Ok(out)
}

fn token_sentence(
    rng: &mut ChaCha20Rng,
    options: &ZxxOptions,
    mut token: impl FnMut(&mut ChaCha20Rng, &ZxxOptions) -> String,
) -> String {
    let n = rng.gen_range(options.tokens_per_sentence.0..=options.tokens_per_sentence.1);
    let mut text = String::new();
    for t in 0..n {
        if t > 0 {
            text.push(' ');
        }
        text.push_str(&token(rng, options));
    }
    text
}

/// Inserts a space between every pair of adjacent non-space characters
/// ("abc" → "a b c"); existing spaces are preserved as-is.
fn space_out(text: &str) -> String {
    let mut out = String::with_capacity(text.len() * 2);
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        out.push(c);
        if let Some(&next) = chars.peek() {
            if c != ' ' && next != ' ' {
                out.push(' ');
            }
        }
    }
    out
}

fn binary_block(rng: &mut ChaCha20Rng, options: &ZxxOptions) -> String {
    let len = rng.gen_range(options.binary_block_bytes.0..=options.binary_block_bytes.1) as usize;
    let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
    String::from_utf8_lossy(&bytes)
        .chars()
        .map(|c| if c.is_control() { ' ' } else { c })
        .collect()
}

/// A 2-4 character unit of accented vowels, repeated 1-3 times ("áàáà").
fn repeated_unit(rng: &mut ChaCha20Rng, alphabet: &[char]) -> String {
    let unit_len = rng.gen_range(2..=4usize);
    let unit: String = (0..unit_len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
    unit.repeat(rng.gen_range(1..=3))
}
