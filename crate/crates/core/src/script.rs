//! Writing-system detection from the Unicode Script property, plus the
//! per-language admissible-script registry.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::{LazyLock, Mutex};

use thiserror::Error;
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};
use unicode_script::{Script, UnicodeScript};

use crate::label::{LabelId, ScriptCode};

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("registry line {line}: expected `<lang>\\t<scripts>`")]
    RegistryShape { line: usize },
    #[error("registry line {line}: {message}")]
    RegistryValue { line: usize, message: String },
    #[error("unknown or empty script {0}")]
    UnknownScript(ScriptCode),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Version of the Unicode tables backing script assignment, e.g. `"17.0.0"`.
pub fn unicode_version() -> String {
    let (a, b, c) = unicode_script::UNICODE_VERSION;
    format!("{a}.{b}.{c}")
}

/// Script of a single character; `None` for Common, Inherited, and Unknown,
/// which carry no script signal of their own.
pub fn char_script(c: char) -> Option<ScriptCode> {
    match c.script() {
        Script::Common | Script::Inherited | Script::Unknown => None,
        s => Some(ScriptCode::new(s.short_name()).expect("table short names are valid codes")),
    }
}

/// Per-script character fractions over the script-bearing characters of a text.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScriptProfile {
    fractions: BTreeMap<ScriptCode, f64>,
}

impl ScriptProfile {
    pub fn fractions(&self) -> &BTreeMap<ScriptCode, f64> {
        &self.fractions
    }

    pub fn fraction(&self, code: ScriptCode) -> f64 {
        self.fractions.get(&code).copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }
}

pub fn script_profile(text: &str) -> ScriptProfile {
    let mut counts: BTreeMap<ScriptCode, u64> = BTreeMap::new();
    let mut total: u64 = 0;
    for c in text.chars() {
        if let Some(code) = char_script(c) {
            *counts.entry(code).or_default() += 1;
            total += 1;
        }
    }
    let fractions =
        counts.into_iter().map(|(code, n)| (code, n as f64 / total as f64)).collect();
    ScriptProfile { fractions }
}

/// Most frequent script of the text; ties resolve to the lexicographically
/// smaller code, `None` when no character bears a script.
pub fn dominant_script(text: &str) -> Option<ScriptCode> {
    let profile = script_profile(text);
    profile
        .fractions
        .iter()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then_with(|| b.0.cmp(a.0)))
        .map(|(&code, _)| code)
}

/// Which scripts each language may legitimately be written in. A label's own
/// script is always admissible, whether or not the language has an entry.
#[derive(Debug, Clone, Default)]
pub struct ScriptRegistry {
    admissible: HashMap<String, BTreeSet<ScriptCode>>,
}

impl ScriptRegistry {
    /// Parses the registry format: one `<iso639-3><TAB><comma-separated
    /// iso15924 list>` line per language; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, ScriptError> {
        let mut admissible: HashMap<String, BTreeSet<ScriptCode>> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lang, scripts) =
                line.split_once('\t').ok_or(ScriptError::RegistryShape { line: idx + 1 })?;
            let lang = lang.trim();
            if lang.len() != 3 || !lang.bytes().all(|b| b.is_ascii_lowercase()) {
                return Err(ScriptError::RegistryValue {
                    line: idx + 1,
                    message: format!("bad language code `{lang}`"),
                });
            }
            let mut set = BTreeSet::new();
            for part in scripts.split(',') {
                let code = ScriptCode::new(part.trim()).map_err(|e| ScriptError::RegistryValue {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
                set.insert(code);
            }
            if set.is_empty() {
                return Err(ScriptError::RegistryValue {
                    line: idx + 1,
                    message: "empty script list".into(),
                });
            }
            admissible.insert(lang.to_string(), set);
        }
        Ok(Self { admissible })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ScriptError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The registry shipped with the crate.
    pub fn builtin() -> &'static Self {
        static BUILTIN: LazyLock<ScriptRegistry> = LazyLock::new(|| {
            ScriptRegistry::parse(include_str!("../data/script_registry.tsv"))
                .expect("shipped registry parses")
        });
        &BUILTIN
    }

    pub fn entry(&self, language: &str) -> Option<&BTreeSet<ScriptCode>> {
        self.admissible.get(language)
    }

    /// Admissible scripts for a label: the registry entry for its language,
    /// plus the label's own script.
    pub fn admissible_for(&self, label: &LabelId) -> BTreeSet<ScriptCode> {
        let mut set = self.admissible.get(label.language()).cloned().unwrap_or_default();
        set.insert(label.script());
        set
    }

    /// Fraction of script-bearing characters whose script is NOT admissible
    /// for the label (0.0 when the text has no script-bearing characters).
    pub fn incompatible_fraction(&self, text: &str, label: &LabelId) -> f64 {
        let admissible = self.admissible_for(label);
        let mut total: u64 = 0;
        let mut incompatible: u64 = 0;
        for c in text.chars() {
            if let Some(code) = char_script(c) {
                total += 1;
                if !admissible.contains(&code) {
                    incompatible += 1;
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            incompatible as f64 / total as f64
        }
    }
}

/// All assigned characters of a script usable for synthetic text: the script's
/// characters minus controls, formats, surrogates, and private use.
pub fn script_chars(code: ScriptCode) -> Result<std::sync::Arc<Vec<char>>, ScriptError> {
    static CACHE: LazyLock<Mutex<HashMap<ScriptCode, std::sync::Arc<Vec<char>>>>> =
        LazyLock::new(|| Mutex::new(HashMap::new()));
    if let Some(hit) = CACHE.lock().unwrap().get(&code) {
        return Ok(hit.clone());
    }
    let script = Script::from_short_name(code.as_str()).ok_or(ScriptError::UnknownScript(code))?;
    let chars: Vec<char> = (0u32..=0x10ffff)
        .filter_map(char::from_u32)
        .filter(|&c| c.script() == script)
        .filter(|&c| c.general_category_group() != GeneralCategoryGroup::Other)
        .collect();
    if chars.is_empty() {
        return Err(ScriptError::UnknownScript(code));
    }
    let arc = std::sync::Arc::new(chars);
    CACHE.lock().unwrap().insert(code, arc.clone());
    Ok(arc)
}
