use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{TranslateError, Translator};
use crate::prompts::Direction;

#[derive(Debug, Error)]
pub enum MockError {
    #[error("cannot read mapping table `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("mapping table line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("noise probabilities must lie in [0, 1] (drop {drop}, swap {swap})")]
    Probability { drop: f64, swap: f64 },
}

/// Returns its input unchanged in both directions.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityMock;

impl Translator for IdentityMock {
    fn translate(&self, text: &str, _: Direction, _: u64, _: usize) -> Result<String, TranslateError> {
        Ok(text.to_string())
    }
}

/// Always fails with the same message.
#[derive(Debug, Clone)]
pub struct FailingMock {
    pub message: String,
}

impl Default for FailingMock {
    fn default() -> Self {
        Self {
            message: "backend unavailable".into(),
        }
    }
}

impl Translator for FailingMock {
    fn translate(&self, _: &str, _: Direction, _: u64, _: usize) -> Result<String, TranslateError> {
        Err(TranslateError::Backend(self.message.clone()))
    }
}

/// Invertible phrase table. Forward translation takes the longest Chinese
/// entry at each position and passes unmatched characters through; the
/// backward pass does the same over whitespace-separated English words and
/// concatenates without spaces. Whitespace in the Chinese source is dropped.
#[derive(Debug, Clone, Default)]
pub struct LexiconMock {
    zh_to_en: HashMap<String, String>,
    en_to_zh: HashMap<String, String>,
    max_zh_chars: usize,
    max_en_words: usize,
}

impl LexiconMock {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, MockError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| MockError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Tab-separated `zh<TAB>en` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, MockError> {
        let mut pairs = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(zh), Some(en), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(MockError::Parse {
                    line: idx + 1,
                    message: "expected exactly two tab-separated columns".into(),
                });
            };
            pairs.push((idx + 1, zh.trim().to_string(), en.trim().to_string()));
        }
        let mut mock = Self::default();
        for (line, zh, en) in pairs {
            mock.insert(&zh, &en).map_err(|message| MockError::Parse { line, message })?;
        }
        Ok(mock)
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, MockError> {
        let mut mock = Self::default();
        for (i, (zh, en)) in pairs.into_iter().enumerate() {
            mock.insert(zh, en)
                .map_err(|message| MockError::Parse { line: i + 1, message })?;
        }
        Ok(mock)
    }

    fn insert(&mut self, zh: &str, en: &str) -> Result<(), String> {
        let en = en.split_whitespace().collect::<Vec<_>>().join(" ");
        if zh.is_empty() || zh.chars().any(char::is_whitespace) || en.is_empty() {
            return Err(format!("bad entry `{zh}` -> `{en}`"));
        }
        if self.zh_to_en.contains_key(zh) || self.en_to_zh.contains_key(&en) {
            return Err(format!("`{zh}` -> `{en}` repeats an existing entry"));
        }
        self.max_zh_chars = self.max_zh_chars.max(zh.chars().count());
        self.max_en_words = self.max_en_words.max(en.split(' ').count());
        self.zh_to_en.insert(zh.to_string(), en.clone());
        self.en_to_zh.insert(en, zh.to_string());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.zh_to_en.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zh_to_en.is_empty()
    }

    pub fn forward_tokens(&self, text: &str) -> Vec<String> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let longest = (1..=self.max_zh_chars.min(chars.len() - i)).rev().find_map(|len| {
                let s: String = chars[i..i + len].iter().collect();
                self.zh_to_en.get(&s).map(|en| (len, en.clone()))
            });
            match longest {
                Some((len, en)) => {
                    out.push(en);
                    i += len;
                }
                None => {
                    out.push(chars[i].to_string());
                    i += 1;
                }
            }
        }
        out
    }

    pub fn backward_tokens(&self, text: &str) -> Vec<String> {
        let words: Vec<&str> = text.split_whitespace().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let longest = (1..=self.max_en_words.min(words.len() - i)).rev().find_map(|len| {
                self.en_to_zh.get(&words[i..i + len].join(" ")).map(|zh| (len, zh.clone()))
            });
            match longest {
                Some((len, zh)) => {
                    out.push(zh);
                    i += len;
                }
                None => {
                    out.push(words[i].to_string());
                    i += 1;
                }
            }
        }
        out
    }

    fn join(direction: Direction, tokens: &[String]) -> String {
        match direction {
            Direction::ZhToEn => tokens.join(" "),
            Direction::EnToZh => tokens.concat(),
        }
    }

    fn tokens(&self, text: &str, direction: Direction) -> Vec<String> {
        match direction {
            Direction::ZhToEn => self.forward_tokens(text),
            Direction::EnToZh => self.backward_tokens(text),
        }
    }
}

impl Translator for LexiconMock {
    fn translate(&self, text: &str, direction: Direction, _: u64, _: usize) -> Result<String, TranslateError> {
        let out = Self::join(direction, &self.tokens(text, direction));
        if out.is_empty() {
            return Err(TranslateError::Empty);
        }
        Ok(out)
    }
}

/// Phrase-table mapping followed by seeded token drops and adjacent swaps.
/// Each leg draws from its own stream so forward and backward noise differ.
#[derive(Debug, Clone)]
pub struct NoiseMock {
    inner: LexiconMock,
    drop: f64,
    swap: f64,
}

impl NoiseMock {
    pub fn new(inner: LexiconMock, drop: f64, swap: f64) -> Result<Self, MockError> {
        if !(0.0..=1.0).contains(&drop) || !(0.0..=1.0).contains(&swap) {
            return Err(MockError::Probability { drop, swap });
        }
        Ok(Self { inner, drop, swap })
    }

    pub fn perturb(&self, tokens: Vec<String>, rng: &mut impl Rng) -> Vec<String> {
        let mut kept: Vec<String> = Vec::with_capacity(tokens.len());
        let mut first_dropped = None;
        for t in tokens {
            if rng.random_bool(self.drop) {
                first_dropped.get_or_insert(t);
            } else {
                kept.push(t);
            }
        }
        // never drop everything
        if kept.is_empty() {
            kept.extend(first_dropped);
        }
        let mut i = 0;
        while i + 1 < kept.len() {
            if rng.random_bool(self.swap) {
                kept.swap(i, i + 1);
                i += 2;
            } else {
                i += 1;
            }
        }
        kept
    }
}

impl Translator for NoiseMock {
    fn translate(&self, text: &str, direction: Direction, seed: u64, _: usize) -> Result<String, TranslateError> {
        let stream = match direction {
            Direction::ZhToEn => 1,
            Direction::EnToZh => 2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let tokens = self.perturb(self.inner.tokens(text, direction), &mut rng);
        let out = LexiconMock::join(direction, &tokens);
        if out.is_empty() {
            return Err(TranslateError::Empty);
        }
        Ok(out)
    }
}
