use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN_TABLE: &str = include_str!("../../../../data/variants/traditional_simplified.txt");

#[derive(Debug, Error)]
pub enum VariantTableError {
    #[error("cannot read variant table `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed variant table line {line}: `{content}`")]
    Malformed { line: usize, content: String },
}

/// Traditional-only characters mapped to their simplified counterparts.
///
/// File format: one `traditional simplified` pair per line; blank lines and
/// lines starting with `#` are skipped.
#[derive(Debug, Clone, Default)]
pub struct VariantTable {
    to_simplified: HashMap<char, char>,
}

impl VariantTable {
    /// The table shipped in `data/variants`, derived from OpenCC's
    /// traditional→simplified character list with every character that is also
    /// a valid simplified form removed.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_TABLE).expect("shipped variant table is well formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, VariantTableError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| VariantTableError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, VariantTableError> {
        let mut to_simplified = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = || VariantTableError::Malformed {
                line: idx + 1,
                content: raw.to_owned(),
            };
            let mut fields = line.split_whitespace();
            let (Some(trad), Some(simp), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(malformed());
            };
            let (Some(t), Some(s)) = (single_char(trad), single_char(simp)) else {
                return Err(malformed());
            };
            to_simplified.insert(t, s);
        }
        Ok(Self { to_simplified })
    }

    pub fn is_traditional_only(&self, c: char) -> bool {
        self.to_simplified.contains_key(&c)
    }

    pub fn simplified_of(&self, c: char) -> Option<char> {
        self.to_simplified.get(&c).copied()
    }

    pub fn len(&self) -> usize {
        self.to_simplified.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_simplified.is_empty()
    }

    /// Maps every traditional-only character to its simplified form.
    pub fn simplify(&self, text: &str) -> String {
        text.chars()
            .map(|c| self.simplified_of(c).unwrap_or(c))
            .collect()
    }
}

fn single_char(s: &str) -> Option<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}

/// CJK unified ideographs, the extension blocks and the compatibility block.
pub fn is_han(c: char) -> bool {
    matches!(c as u32,
        0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0x20000..=0x2A6DF
        | 0x2A700..=0x2EBEF
        | 0x2F800..=0x2FA1F
        | 0x30000..=0x323AF)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraditionalScan {
    /// Traditional-only characters over all Han characters; 0 without Han.
    pub ratio: f64,
    pub flagged: bool,
    pub traditional_chars: usize,
    pub han_chars: usize,
}

pub fn detect_traditional(text: &str, table: &VariantTable, threshold: f64) -> TraditionalScan {
    let (mut han, mut trad) = (0usize, 0usize);
    for c in text.chars().filter(|&c| is_han(c)) {
        han += 1;
        if table.is_traditional_only(c) {
            trad += 1;
        }
    }
    let ratio = if han == 0 {
        0.0
    } else {
        trad as f64 / han as f64
    };
    TraditionalScan {
        ratio,
        flagged: ratio > threshold,
        traditional_chars: trad,
        han_chars: han,
    }
}
