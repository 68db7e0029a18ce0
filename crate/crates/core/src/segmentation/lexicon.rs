use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed lexicon line {line}: `{content}`")]
    Malformed { line: usize, content: String },
    #[error("non-positive frequency on lexicon line {line} for `{surface}`")]
    NonPositiveFrequency { line: usize, surface: String },
}

/// Word-frequency lexicon with a prefix index over every entry.
///
/// The file format is the common `surface frequency [tag]` layout, one entry
/// per line, fields separated by single spaces. Tags are parsed and dropped.
/// Repeated surface forms have their frequencies summed.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, u64>,
    prefixes: HashSet<String>,
    total: u64,
    max_chars: usize,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| LexiconError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_reader(BufReader::new(file)).map_err(|e| match e {
            LexiconError::Io { source, .. } => LexiconError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    pub fn from_reader<R: Read>(reader: BufReader<R>) -> Result<Self, LexiconError> {
        let mut lexicon = Lexicon::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|source| LexiconError::Io {
                path: PathBuf::new(),
                source,
            })?;
            let line = line.trim_end_matches('\r');
            let line = if line_no == 1 {
                line.trim_start_matches('\u{feff}')
            } else {
                line
            };
            if line.trim().is_empty() {
                continue;
            }
            let (surface, freq) = parse_line(line, line_no)?;
            lexicon.insert(surface, freq);
        }
        Ok(lexicon)
    }

    /// Builds a lexicon from `(surface, frequency)` pairs. Zero frequencies are
    /// rejected the same way the file loader rejects them.
    pub fn from_entries<I, S>(entries: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut lexicon = Lexicon::new();
        for (idx, (surface, freq)) in entries.into_iter().enumerate() {
            let surface = surface.into();
            if freq == 0 {
                return Err(LexiconError::NonPositiveFrequency {
                    line: idx + 1,
                    surface,
                });
            }
            if surface.is_empty() || surface.chars().any(char::is_whitespace) {
                return Err(LexiconError::Malformed {
                    line: idx + 1,
                    content: surface,
                });
            }
            lexicon.insert(&surface, freq);
        }
        Ok(lexicon)
    }

    /// Adds `freq` occurrences of `surface`. Callers guarantee `freq >= 1` and a
    /// non-empty surface without whitespace.
    pub fn insert(&mut self, surface: &str, freq: u64) {
        debug_assert!(freq >= 1);
        *self.entries.entry(surface.to_owned()).or_insert(0) += freq;
        self.total += freq;
        let mut end = 0;
        let mut chars = 0;
        for c in surface.chars() {
            end += c.len_utf8();
            chars += 1;
            if !self.prefixes.contains(&surface[..end]) {
                self.prefixes.insert(surface[..end].to_owned());
            }
        }
        self.max_chars = self.max_chars.max(chars);
    }

    pub fn frequency(&self, surface: &str) -> Option<u64> {
        self.entries.get(surface).copied()
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.entries.contains_key(surface)
    }

    pub fn is_prefix(&self, s: &str) -> bool {
        self.prefixes.contains(s)
    }

    pub fn total_frequency(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_entry_chars(&self) -> usize {
        self.max_chars
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// `ln(freq / total)` for an entry; `None` for surfaces not in the lexicon.
    pub fn log_prob(&self, surface: &str) -> Option<f64> {
        self.frequency(surface)
            .map(|f| (f as f64).ln() - self.log_total())
    }

    /// Log-probability charged to a single character no entry covers:
    /// `ln(1 / total)`. An empty lexicon is treated as total 1.
    pub fn floor_log_prob(&self) -> f64 {
        -self.log_total()
    }

    fn log_total(&self) -> f64 {
        (self.total.max(1) as f64).ln()
    }
}

fn parse_line(line: &str, line_no: usize) -> Result<(&str, u64), LexiconError> {
    let malformed = || LexiconError::Malformed {
        line: line_no,
        content: line.to_owned(),
    };
    let fields: Vec<&str> = line.split(' ').collect();
    if !(2..=3).contains(&fields.len()) || fields.iter().any(|f| f.is_empty()) {
        return Err(malformed());
    }
    let surface = fields[0];
    let freq: i64 = fields[1].parse().map_err(|_| malformed())?;
    if freq <= 0 {
        return Err(LexiconError::NonPositiveFrequency {
            line: line_no,
            surface: surface.to_owned(),
        });
    }
    Ok((surface, freq as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Lexicon, LexiconError> {
        Lexicon::from_reader(BufReader::new(text.as_bytes()))
    }

    #[test]
    fn parses_entry_and_discards_tag() {
        let lex = parse("人工智能 100 n\n").unwrap();
        assert_eq!(lex.frequency("人工智能"), Some(100));
        assert_eq!(lex.total_frequency(), 100);
        assert!(lex.is_prefix("人"));
        assert!(lex.is_prefix("人工智"));
        assert!(!lex.is_prefix("工"));
    }

    #[test]
    fn duplicate_surfaces_are_summed() {
        let lex = parse("智能 5 n\n智能 7\n").unwrap();
        assert_eq!(lex.frequency("智能"), Some(12));
        assert_eq!(lex.total_frequency(), 12);
        assert_eq!(lex.len(), 1);
    }

    #[test]
    fn negative_frequency_is_rejected() {
        let err = parse("智能 -5\n").unwrap_err();
        assert!(matches!(err, LexiconError::NonPositiveFrequency { line: 1, .. }));
        assert!(err.to_string().contains("non-positive frequency"));
        assert!(matches!(
            parse("a 1\n智能 0\n").unwrap_err(),
            LexiconError::NonPositiveFrequency { line: 2, .. }
        ));
    }

    #[test]
    fn malformed_lines_report_their_line_number() {
        assert!(matches!(
            parse("a 1\nb\n").unwrap_err(),
            LexiconError::Malformed { line: 2, .. }
        ));
        assert!(matches!(
            parse("a x\n").unwrap_err(),
            LexiconError::Malformed { line: 1, .. }
        ));
        assert!(matches!(
            parse("a 1 n extra\n").unwrap_err(),
            LexiconError::Malformed { line: 1, .. }
        ));
    }

    #[test]
    fn blank_lines_and_crlf_are_tolerated() {
        let lex = parse("\u{feff}甲 2 n\r\n\r\n乙 3\r\n").unwrap();
        assert_eq!(lex.frequency("甲"), Some(2));
        assert_eq!(lex.frequency("乙"), Some(3));
        assert_eq!(lex.total_frequency(), 5);
    }

    #[test]
    fn from_entries_rejects_zero() {
        assert!(Lexicon::from_entries([("a", 0)]).is_err());
        let lex = Lexicon::from_entries([("ab", 2), ("a", 1)]).unwrap();
        assert_eq!(lex.max_entry_chars(), 2);
    }
}
