//! JSONL corpora of source texts.
//!
//! One record per line:
//! `{"id": "...", "domain": "...", "title": "...", "text": "...", "variant": "simplified"}`
//! with `title` and `variant` optional. Fields outside that set are kept
//! verbatim in [`TextSample::extra`] and written back out on serialization.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::segmentation::{detect_traditional, VariantTable, DEFAULT_TRADITIONAL_THRESHOLD};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("empty corpus")]
    Empty,
    #[error("malformed record on line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate id `{id}` on line {line} (first seen on line {first_line})")]
    DuplicateId {
        id: String,
        line: usize,
        first_line: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScriptVariant {
    Simplified,
    Traditional,
    #[default]
    Unknown,
}

impl ScriptVariant {
    fn is_unknown(&self) -> bool {
        matches!(self, ScriptVariant::Unknown)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextSample {
    pub id: String,
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub text: String,
    #[serde(default, skip_serializing_if = "ScriptVariant::is_unknown")]
    pub variant: ScriptVariant,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl TextSample {
    pub fn new(id: impl Into<String>, domain: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            domain: domain.into(),
            title: None,
            text: text.into(),
            variant: ScriptVariant::Unknown,
            extra: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub name: String,
    pub samples: Vec<TextSample>,
}

impl Corpus {
    /// Reads a corpus file; the corpus name is the file stem.
    pub fn parse_path(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse_str(name, &text)
    }

    pub fn parse_str(name: impl Into<String>, text: &str) -> Result<Self, CorpusError> {
        let mut samples = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (idx, line) in text.split('\n').enumerate() {
            let line_no = idx + 1;
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() {
                continue;
            }
            let sample: TextSample =
                serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
                    line: line_no,
                    message: e.to_string(),
                })?;
            if sample.id.trim().is_empty() {
                return Err(CorpusError::Malformed {
                    line: line_no,
                    message: "empty id".into(),
                });
            }
            if sample.text.trim().is_empty() {
                return Err(CorpusError::Malformed {
                    line: line_no,
                    message: format!("sample `{}` has blank text", sample.id),
                });
            }
            if let Some(&first_line) = seen.get(&sample.id) {
                return Err(CorpusError::DuplicateId {
                    id: sample.id,
                    line: line_no,
                    first_line,
                });
            }
            seen.insert(sample.id.clone(), line_no);
            samples.push(sample);
        }
        if samples.is_empty() {
            return Err(CorpusError::Empty);
        }
        Ok(Self {
            name: name.into(),
            samples,
        })
    }

    /// One JSON record per line, LF-terminated, in sample order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for sample in &self.samples {
            out.push_str(&serde_json::to_string(sample).expect("sample serializes"));
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&TextSample> {
        self.samples.iter().find(|s| s.id == id)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TextSample> {
        self.samples.iter()
    }
}

#[derive(Debug, Clone)]
pub struct ValidationPolicy {
    pub variant_table: VariantTable,
    pub traditional_threshold: f64,
    /// Shortest text, in non-whitespace characters, that still has a 2-gram.
    pub min_chars: usize,
    /// Also check samples whose variant is `unknown`.
    pub strict: bool,
}

impl Default for ValidationPolicy {
    fn default() -> Self {
        Self {
            variant_table: VariantTable::builtin(),
            traditional_threshold: DEFAULT_TRADITIONAL_THRESHOLD,
            min_chars: 2,
            strict: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarningKind {
    TraditionalDetected { ratio: f64 },
    TooShort { chars: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationWarning {
    pub sample_id: String,
    #[serde(flatten)]
    pub kind: WarningKind,
}

impl fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            WarningKind::TraditionalDetected { ratio } => write!(
                f,
                "{}: traditional characters detected ({:.1}% of Han characters)",
                self.sample_id,
                ratio * 100.0
            ),
            WarningKind::TooShort { chars } => write!(
                f,
                "{}: sample too short for 2-gram BLEU ({chars} character{})",
                self.sample_id,
                if *chars == 1 { "" } else { "s" }
            ),
        }
    }
}

pub fn validate_corpus(corpus: &Corpus, policy: &ValidationPolicy) -> Vec<ValidationWarning> {
    let mut warnings = Vec::new();
    for sample in &corpus.samples {
        let chars = sample.text.chars().filter(|c| !c.is_whitespace()).count();
        if chars < policy.min_chars {
            warnings.push(ValidationWarning {
                sample_id: sample.id.clone(),
                kind: WarningKind::TooShort { chars },
            });
        }
        let check = match sample.variant {
            ScriptVariant::Simplified => true,
            ScriptVariant::Unknown => policy.strict,
            ScriptVariant::Traditional => false,
        };
        if check {
            let scan = detect_traditional(
                &sample.text,
                &policy.variant_table,
                policy.traditional_threshold,
            );
            if scan.flagged {
                warnings.push(ValidationWarning {
                    sample_id: sample.id.clone(),
                    kind: WarningKind::TraditionalDetected { ratio: scan.ratio },
                });
            }
        }
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, text: &str) -> String {
        format!(r#"{{"id":"{id}","domain":"chemistry","text":"{text}"}}"#)
    }

    #[test]
    fn parses_in_file_order_with_unknown_variant() {
        let src = format!("{}\n{}\n", line("b", "乙"), line("a", "甲"));
        let corpus = Corpus::parse_str("t", &src).unwrap();
        let ids: Vec<_> = corpus.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["b", "a"]);
        assert_eq!(corpus.samples[0].variant, ScriptVariant::Unknown);
        assert_eq!(corpus.samples[0].title, None);
    }

    #[test]
    fn empty_file_is_an_error() {
        let err = Corpus::parse_str("t", "").unwrap_err();
        assert_eq!(err.to_string(), "empty corpus");
        assert!(matches!(Corpus::parse_str("t", "\n\n"), Err(CorpusError::Empty)));
    }

    #[test]
    fn duplicate_id_names_the_later_line() {
        let mut lines: Vec<String> = (1..=7).map(|i| line(&format!("X-{i}"), "文本")).collect();
        lines[2] = line("CHE-18", "文本");
        lines[6] = line("CHE-18", "文本");
        let err = Corpus::parse_str("t", &lines.join("\n")).unwrap_err();
        match err {
            CorpusError::DuplicateId { id, line, first_line } => {
                assert_eq!(id, "CHE-18");
                assert_eq!(line, 7);
                assert_eq!(first_line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_position() {
        let src = format!("{}\n{{not json\n", line("a", "甲"));
        assert!(matches!(
            Corpus::parse_str("t", &src),
            Err(CorpusError::Malformed { line: 2, .. })
        ));
        let blank = r#"{"id":"a","domain":"x","text":"   "}"#;
        assert!(matches!(
            Corpus::parse_str("t", blank),
            Err(CorpusError::Malformed { line: 1, .. })
        ));
        let no_id = r#"{"id":"","domain":"x","text":"甲"}"#;
        assert!(Corpus::parse_str("t", no_id).is_err());
    }

    #[test]
    fn extra_fields_survive_round_trip() {
        let src = r#"{"id":"a","domain":"x","text":"甲乙","variant":"simplified","source":"cnki","year":2024}"#;
        let corpus = Corpus::parse_str("t", src).unwrap();
        assert_eq!(corpus.samples[0].extra["year"], Value::from(2024));
        let again = Corpus::parse_str("t", &corpus.to_jsonl()).unwrap();
        assert_eq!(again, corpus);
    }

    #[test]
    fn pure_simplified_corpus_has_no_warnings() {
        let src = r#"{"id":"a","domain":"x","text":"元素观点：物质由元素组成","variant":"simplified"}"#;
        let corpus = Corpus::parse_str("t", src).unwrap();
        assert!(validate_corpus(&corpus, &ValidationPolicy::default()).is_empty());
    }

    #[test]
    fn declared_simplified_with_traditional_text_warns() {
        let src = r#"{"id":"a","domain":"x","text":"元素觀點","variant":"simplified"}"#;
        let corpus = Corpus::parse_str("t", src).unwrap();
        let warnings = validate_corpus(&corpus, &ValidationPolicy::default());
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].to_string().contains("traditional characters detected"));
    }

    #[test]
    fn declared_traditional_is_not_checked() {
        let src = r#"{"id":"a","domain":"x","text":"元素觀點","variant":"traditional"}"#;
        let corpus = Corpus::parse_str("t", src).unwrap();
        assert!(validate_corpus(&corpus, &ValidationPolicy::default()).is_empty());
    }

    #[test]
    fn single_character_sample_is_too_short() {
        let corpus = Corpus::parse_str("t", &line("a", "铁")).unwrap();
        let warnings = validate_corpus(&corpus, &ValidationPolicy::default());
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].to_string().contains("sample too short for 2-gram BLEU"));
    }
}
