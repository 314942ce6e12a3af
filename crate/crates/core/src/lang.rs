use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// The closed set of languages the harness can translate between and execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LanguageId {
    Python,
    Java,
    Cpp,
}

impl LanguageId {
    pub const ALL: [LanguageId; 3] = [LanguageId::Python, LanguageId::Java, LanguageId::Cpp];

    /// Stable lowercase identifier used in files and on the wire.
    pub fn slug(self) -> &'static str {
        match self {
            LanguageId::Python => "python",
            LanguageId::Java => "java",
            LanguageId::Cpp => "cpp",
        }
    }

    /// Human-facing name, as used in prompts and report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            LanguageId::Python => "Python",
            LanguageId::Java => "Java",
            LanguageId::Cpp => "C++",
        }
    }

    /// Info strings a fenced code block may carry for this language.
    pub fn fence_labels(self) -> &'static [&'static str] {
        match self {
            LanguageId::Python => &["python", "python3", "py"],
            LanguageId::Java => &["java"],
            LanguageId::Cpp => &["cpp", "c++", "cxx", "cc", "c"],
        }
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for LanguageId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "python" | "py" | "python3" => Ok(LanguageId::Python),
            "java" => Ok(LanguageId::Java),
            "cpp" | "c++" | "cxx" => Ok(LanguageId::Cpp),
            _ => Err(Error::UnsupportedLanguage(s.to_string())),
        }
    }
}

impl Serialize for LanguageId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.slug())
    }
}

impl<'de> Deserialize<'de> for LanguageId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(|_| {
            serde::de::Error::custom(format!(
                "unsupported-language: {raw:?} (expected python, java or cpp)"
            ))
        })
    }
}

/// An ordered (source, target) translation direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LanguagePair {
    pub source: LanguageId,
    pub target: LanguageId,
}

impl LanguagePair {
    pub fn new(source: LanguageId, target: LanguageId) -> crate::Result<Self> {
        if source == target {
            return Err(Error::SameLanguage(source));
        }
        Ok(Self { source, target })
    }

    /// The six ordered pairs over the three languages.
    pub fn all() -> Vec<LanguagePair> {
        let mut pairs = Vec::with_capacity(6);
        for source in LanguageId::ALL {
            for target in LanguageId::ALL {
                if source != target {
                    pairs.push(LanguagePair { source, target });
                }
            }
        }
        pairs
    }

    pub fn is_valid(&self) -> bool {
        self.source != self.target
    }
}

impl fmt::Display for LanguagePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} → {}", self.source, self.target)
    }
}

impl FromStr for LanguagePair {
    type Err = Error;

    /// Accepts `java:python`, `java->python` and `java→python`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (src, tgt) = s
            .split_once("->")
            .or_else(|| s.split_once('→'))
            .or_else(|| s.split_once(':'))
            .ok_or_else(|| Error::Invalid(format!("pair {s:?} must look like SRC:TGT")))?;
        LanguagePair::new(src.parse()?, tgt.parse()?)
    }
}
