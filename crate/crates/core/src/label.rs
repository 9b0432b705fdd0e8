//! Language labels of the form `<iso639-3>_<Iso15924>`, e.g. `rus_Cyrl`.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelError {
    #[error("label `{0}` is not of the form xxx_Yyyy")]
    Shape(String),
    #[error("language code `{0}` must be three lowercase ASCII letters")]
    Language(String),
    #[error("script code `{0}` must be four ASCII letters in title case")]
    Script(String),
}

/// ISO 15924 script code, four ASCII letters, title case (`Cyrl`, `Zzzz`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScriptCode([u8; 4]);

impl ScriptCode {
    pub fn new(code: &str) -> Result<Self, LabelError> {
        let bytes = code.as_bytes();
        let ok = bytes.len() == 4
            && bytes[0].is_ascii_uppercase()
            && bytes[1..].iter().all(|b| b.is_ascii_lowercase());
        if !ok {
            return Err(LabelError::Script(code.to_string()));
        }
        Ok(Self([bytes[0], bytes[1], bytes[2], bytes[3]]))
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("script codes are ASCII")
    }
}

impl fmt::Display for ScriptCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for ScriptCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScriptCode({})", self.as_str())
    }
}

impl FromStr for ScriptCode {
    type Err = LabelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

/// A language identification label: ISO 639-3 code plus ISO 15924 script.
///
/// `und` (undetermined) and `zxx` (no linguistic content) are ordinary
/// language codes here; they mark rejection-only labels downstream.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId {
    language: [u8; 3],
    script: ScriptCode,
}

impl LabelId {
    pub fn new(language: &str, script: &str) -> Result<Self, LabelError> {
        let lb = language.as_bytes();
        if lb.len() != 3 || !lb.iter().all(|b| b.is_ascii_lowercase()) {
            return Err(LabelError::Language(language.to_string()));
        }
        Ok(Self {
            language: [lb[0], lb[1], lb[2]],
            script: ScriptCode::new(script)?,
        })
    }

    pub fn from_parts(language: &str, script: ScriptCode) -> Result<Self, LabelError> {
        Self::new(language, script.as_str())
    }

    pub fn language(&self) -> &str {
        std::str::from_utf8(&self.language).expect("language codes are ASCII")
    }

    pub fn script(&self) -> ScriptCode {
        self.script
    }

    pub fn is_und(&self) -> bool {
        &self.language == b"und"
    }

    pub fn is_zxx(&self) -> bool {
        &self.language == b"zxx"
    }

    /// Labels that exist only to reject content, never to keep it.
    pub fn is_rejection_only(&self) -> bool {
        self.is_und() || self.is_zxx()
    }
}

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.language(), self.script)
    }
}

impl fmt::Debug for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LabelId({self})")
    }
}

impl FromStr for LabelId {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lang, script) = s.split_once('_').ok_or_else(|| LabelError::Shape(s.to_string()))?;
        if script.contains('_') {
            return Err(LabelError::Shape(s.to_string()));
        }
        Self::new(lang, script)
    }
}

impl Serialize for LabelId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LabelId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_render_roundtrip() {
        for s in ["rus_Cyrl", "und_Talu", "zxx_Zzzz", "eng_Latn"] {
            let label: LabelId = s.parse().unwrap();
            assert_eq!(label.to_string(), s);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        for s in ["rus", "rus_cyrl", "RUS_Cyrl", "ru_Cyrl", "rus_CYRL", "rus_Cyrl_x", "rus-Cyrl", ""] {
            assert!(s.parse::<LabelId>().is_err(), "{s:?} should not parse");
        }
    }

    #[test]
    fn rejection_only_labels() {
        assert!("und_Talu".parse::<LabelId>().unwrap().is_rejection_only());
        assert!("zxx_Latn".parse::<LabelId>().unwrap().is_rejection_only());
        assert!(!"eng_Latn".parse::<LabelId>().unwrap().is_rejection_only());
    }

    #[test]
    fn accessors() {
        let label: LabelId = "hin_Deva".parse().unwrap();
        assert_eq!(label.language(), "hin");
        assert_eq!(label.script().as_str(), "Deva");
    }

    #[test]
    fn ordering_is_lexicographic_on_rendered_form() {
        let mut labels: Vec<LabelId> = ["zxx_Latn", "eng_Latn", "und_Armn", "eng_Brai"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        labels.sort();
        let rendered: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
        assert_eq!(rendered, ["eng_Brai", "eng_Latn", "und_Armn", "zxx_Latn"]);
    }

    #[test]
    fn serde_as_string() {
        let label: LabelId = "ell_Grek".parse().unwrap();
        assert_eq!(serde_json::to_string(&label).unwrap(), "\"ell_Grek\"");
        let back: LabelId = serde_json::from_str("\"ell_Grek\"").unwrap();
        assert_eq!(back, label);
    }
}
