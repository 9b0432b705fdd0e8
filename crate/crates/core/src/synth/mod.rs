//! Synthetic training data: und_<Script> sentences for unseen writing systems
//! and the six zxx web-noise kinds.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use thiserror::Error;

use crate::corpus::LabeledSentence;
use crate::label::{LabelId, ScriptCode};
use crate::script::ScriptError;

mod und;
mod zxx;

pub use und::{gen_und, UndGenerator, DEFAULT_UND_LEN_RANGE, DEFAULT_UND_SENTENCES};
pub use zxx::{gen_zxx, gen_zxx_with, ZxxGenerator, ZxxOptions};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("unknown noise kind `{0}`")]
    UnknownKind(String),
    #[error("noise kind `{0}` requires a non-empty carrier corpus")]
    MissingCarrier(&'static str),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Script(#[from] ScriptError),
}

/// The six web-noise varieties, each mapping onto a zxx_* label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NoiseKind {
    MisrenderedPdf,
    Antspeak,
    Binary,
    MojibakeLatin,
    MojibakeArabic,
    ReplacementChar,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 6] = [
        NoiseKind::MisrenderedPdf,
        NoiseKind::Antspeak,
        NoiseKind::Binary,
        NoiseKind::MojibakeLatin,
        NoiseKind::MojibakeArabic,
        NoiseKind::ReplacementChar,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::MisrenderedPdf => "misrendered_pdf",
            NoiseKind::Antspeak => "antspeak",
            NoiseKind::Binary => "binary",
            NoiseKind::MojibakeLatin => "mojibake_latin",
            NoiseKind::MojibakeArabic => "mojibake_arabic",
            NoiseKind::ReplacementChar => "replacement_char",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, SynthError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| SynthError::UnknownKind(name.to_string()))
    }

    /// Label carried by sentences of this noise kind.
    pub fn label(&self) -> LabelId {
        let script = match self {
            NoiseKind::MojibakeArabic => "Arab",
            NoiseKind::ReplacementChar => "Zzzz",
            _ => "Latn",
        };
        LabelId::new("zxx", script).expect("static labels are valid")
    }

    pub fn needs_carrier(&self) -> bool {
        matches!(self, NoiseKind::Antspeak | NoiseKind::ReplacementChar)
    }
}

/// A named source of labeled synthetic sentences.
pub trait SentenceGenerator: Send + Sync {
    fn name(&self) -> String;
    fn label(&self) -> LabelId;
    fn needs_carrier(&self) -> bool {
        false
    }
    /// Deterministic in (generator parameters, `n`, `seed`, carrier contents).
    fn generate(
        &self,
        n: usize,
        seed: u64,
        carrier: Option<&[String]>,
    ) -> Result<Vec<LabeledSentence>, SynthError>;
}

/// Name-keyed registry of sentence generators. `standard()` holds the six
/// noise kinds; script-parameterized oddballs can be registered on top.
pub struct GeneratorRegistry {
    generators: BTreeMap<String, Box<dyn SentenceGenerator>>,
}

impl GeneratorRegistry {
    pub fn empty() -> Self {
        Self { generators: BTreeMap::new() }
    }

    pub fn standard() -> Self {
        let mut reg = Self::empty();
        for kind in NoiseKind::ALL {
            reg.register(Box::new(ZxxGenerator::new(kind, ZxxOptions::default())));
        }
        reg
    }

    pub fn register(&mut self, generator: Box<dyn SentenceGenerator>) {
        self.generators.insert(generator.name(), generator);
    }

    pub fn get(&self, name: &str) -> Option<&dyn SentenceGenerator> {
        self.generators.get(name).map(|g| g.as_ref())
    }

    pub fn names(&self) -> Vec<String> {
        self.generators.keys().cloned().collect()
    }
}

/// Scripts shipped as default und_<Script> generation targets.
pub fn default_und_scripts() -> &'static [ScriptCode] {
    static SCRIPTS: LazyLock<Vec<ScriptCode>> = LazyLock::new(|| {
        include_str!("../../data/und_scripts.txt")
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| ScriptCode::new(l).expect("shipped script codes are valid"))
            .collect()
    });
    &SCRIPTS
}
