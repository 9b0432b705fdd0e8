//! und_<Script> sentences: pseudo-tokens of uniformly random characters from
//! one script's inventory.

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use crate::corpus::LabeledSentence;
use crate::label::{LabelId, ScriptCode};
use crate::script::script_chars;

use super::{SentenceGenerator, SynthError};

pub const DEFAULT_UND_SENTENCES: usize = 100_000;
/// Pseudo-token length bounds (characters); chosen to resemble natural tokens.
pub const DEFAULT_UND_LEN_RANGE: (u32, u32) = (1, 12);
/// Tokens per sentence, uniform in this range.
pub(crate) const TOKENS_PER_SENTENCE: (u32, u32) = (3, 15);

pub struct UndGenerator {
    script: ScriptCode,
    len_range: (u32, u32),
}

impl UndGenerator {
    pub fn new(script: ScriptCode, len_range: (u32, u32)) -> Result<Self, SynthError> {
        if len_range.0 < 1 || len_range.0 > len_range.1 {
            return Err(SynthError::Params(format!(
                "token length range must satisfy 1 <= min <= max, got {len_range:?}"
            )));
        }
        Ok(Self { script, len_range })
    }
}

impl SentenceGenerator for UndGenerator {
    fn name(&self) -> String {
        self.label().to_string()
    }

    fn label(&self) -> LabelId {
        LabelId::from_parts("und", self.script).expect("und labels are valid")
    }

    fn generate(
        &self,
        n: usize,
        seed: u64,
        _carrier: Option<&[String]>,
    ) -> Result<Vec<LabeledSentence>, SynthError> {
        let inventory = script_chars(self.script)?;
        let label = self.label();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let n_tokens = rng.gen_range(TOKENS_PER_SENTENCE.0..=TOKENS_PER_SENTENCE.1);
            let mut text = String::new();
            for t in 0..n_tokens {
                if t > 0 {
                    text.push(' ');
                }
                let len = rng.gen_range(self.len_range.0..=self.len_range.1);
                for _ in 0..len {
                    text.push(inventory[rng.gen_range(0..inventory.len())]);
                }
            }
            out.push(LabeledSentence::new(label, text));
        }
        Ok(out)
    }
}

/// Sentences of random characters of `script`, labeled `und_<Script>`.
pub fn gen_und(
    script: ScriptCode,
    n_sentences: usize,
    len_range: (u32, u32),
    seed: u64,
) -> Result<Vec<LabeledSentence>, SynthError> {
    UndGenerator::new(script, len_range)?.generate(n_sentences, seed, None)
}
