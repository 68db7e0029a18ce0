//! Run configuration, read from TOML or JSON. Relative paths resolve against
//! the directory holding the config file.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zhbt_core::metrics::ScoringConfig;
use zhbt_core::segmentation::DEFAULT_TRADITIONAL_THRESHOLD;
use zhbt_core::stats::AnalysisOptions;

use crate::backend::{
    FailingMock, HttpBackend, HttpSettings, IdentityMock, LexiconMock, NoiseMock, RateLimiter, Translator,
};
use crate::prompts::PromptSet;
use crate::run::RunManifest;
use crate::PipelineError;

pub const DEFAULT_VERBATIM_THRESHOLD: f64 = 0.70;
pub const DEFAULT_MAX_ERROR_FRACTION: f64 = 0.5;
pub const DEFAULT_HTTP_RATE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub lexicon: PathBuf,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub scoring: ScoringConfig,
    #[serde(default)]
    pub analysis: AnalysisOptions,
    #[serde(default)]
    pub thresholds: Thresholds,
    pub backends: Vec<BackendConfig>,
}

fn default_repetitions() -> usize {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Word-BLEU of ZHy against ZHx at or above which a record is verbatim.
    pub verbatim: f64,
    /// Share of traditional-only Han characters above which ZHy is flagged.
    pub traditional: f64,
    /// Failed-record share above which the run counts as degraded.
    pub max_error_fraction: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            verbatim: DEFAULT_VERBATIM_THRESHOLD,
            traditional: DEFAULT_TRADITIONAL_THRESHOLD,
            max_error_fraction: DEFAULT_MAX_ERROR_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub id: String,
    #[serde(flatten)]
    pub kind: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_template_forward: Option<Templates>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_template_backward: Option<Templates>,
    /// Concurrent requests; defaults to 1 for HTTP and the core count for mocks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Requests per second; defaults to 1 for HTTP, unlimited for mocks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_limit_per_sec: Option<f64>,
    #[serde(default = "default_burst")]
    pub burst: u32,
}

fn default_burst() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendKind {
    HttpLlm(HttpSettings),
    Mock(MockSettings),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MockKind {
    Identity,
    Lexicon,
    Noise,
    Failing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockSettings {
    pub mock: MockKind,
    /// Bilingual table for `lexicon` and `noise`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    #[serde(default)]
    pub drop: f64,
    #[serde(default)]
    pub swap: f64,
}

/// A single template or a list of variants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Templates {
    One(String),
    Many(Vec<String>),
}

impl Templates {
    fn to_vec(&self) -> Vec<String> {
        match self {
            Templates::One(s) => vec![s.clone()],
            Templates::Many(v) => v.clone(),
        }
    }
}

impl BackendConfig {
    pub fn mock(id: impl Into<String>, settings: MockSettings) -> Self {
        Self {
            id: id.into(),
            kind: BackendKind::Mock(settings),
            prompt_template_forward: None,
            prompt_template_backward: None,
            workers: None,
            rate_limit_per_sec: None,
            burst: default_burst(),
        }
    }

    pub fn http(id: impl Into<String>, settings: HttpSettings) -> Self {
        Self {
            kind: BackendKind::HttpLlm(settings),
            ..Self::mock(id, MockSettings::identity())
        }
    }

    pub fn prompts(&self) -> PromptSet {
        let mut set = PromptSet::default();
        if let Some(t) = &self.prompt_template_forward {
            set.forward = t.to_vec();
        }
        if let Some(t) = &self.prompt_template_backward {
            set.backward = t.to_vec();
        }
        set
    }

    pub fn workers(&self) -> usize {
        let default = match self.kind {
            BackendKind::HttpLlm(_) => 1,
            BackendKind::Mock(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        self.workers.unwrap_or(default).max(1)
    }

    pub fn rate_limiter(&self) -> RateLimiter {
        let rate = match self.kind {
            BackendKind::HttpLlm(_) => Some(self.rate_limit_per_sec.unwrap_or(DEFAULT_HTTP_RATE)),
            BackendKind::Mock(_) => self.rate_limit_per_sec,
        };
        RateLimiter::new(rate, self.burst)
    }

    /// Instantiates the backend. HTTP keys are read from the named
    /// environment variable here, never from the config itself.
    pub fn build(&self) -> Result<Box<dyn Translator>, PipelineError> {
        match &self.kind {
            BackendKind::Mock(m) => {
                let table = || -> Result<LexiconMock, PipelineError> {
                    let path = m.table.as_ref().ok_or_else(|| {
                        PipelineError::Config(format!("backend `{}` needs a `table`", self.id))
                    })?;
                    Ok(LexiconMock::load(path)?)
                };
                Ok(match m.mock {
                    MockKind::Identity => Box::new(IdentityMock),
                    MockKind::Lexicon => Box::new(table()?),
                    MockKind::Noise => Box::new(NoiseMock::new(table()?, m.drop, m.swap)?),
                    MockKind::Failing => Box::new(FailingMock::default()),
                })
            }
            BackendKind::HttpLlm(h) => {
                let api_key = match &h.api_key_env {
                    Some(var) => Some(std::env::var(var).map_err(|_| {
                        PipelineError::Config(format!(
                            "backend `{}`: environment variable `{var}` is not set",
                            self.id
                        ))
                    })?),
                    None => None,
                };
                let backend = HttpBackend::new(h.clone(), self.prompts(), api_key, self.rate_limiter())
                    .map_err(|e| PipelineError::Config(e.to_string()))?;
                Ok(Box::new(backend))
            }
        }
    }
}

impl MockSettings {
    pub fn identity() -> Self {
        Self {
            mock: MockKind::Identity,
            table: None,
            drop: 0.0,
            swap: 0.0,
        }
    }

    pub fn failing() -> Self {
        Self {
            mock: MockKind::Failing,
            ..Self::identity()
        }
    }

    pub fn lexicon(table: impl Into<PathBuf>) -> Self {
        Self {
            mock: MockKind::Lexicon,
            table: Some(table.into()),
            ..Self::identity()
        }
    }

    pub fn noise(table: impl Into<PathBuf>, drop: f64, swap: f64) -> Self {
        Self {
            mock: MockKind::Noise,
            table: Some(table.into()),
            drop,
            swap,
        }
    }
}

/// Parses a TOML file, or JSON when the extension is `.json`, into a JSON value.
pub fn load_value(path: &Path) -> Result<serde_json::Value, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        return Ok(serde_json::from_str(&text)?);
    }
    let value: toml::Value = toml::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    Ok(serde_json::to_value(value)?)
}

/// A config ready to run, plus the corpus hash to check when it came from a
/// manifest.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub expected_corpus_sha256: Option<String>,
}

impl RunConfig {
    /// Reads `.toml` or `.json`. A JSON run manifest is accepted too, so a
    /// finished run can be replayed from its own output directory.
    pub fn load(path: impl AsRef<Path>) -> Result<LoadedConfig, PipelineError> {
        let path = path.as_ref();
        let value = load_value(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let (mut config, expected_corpus_sha256) =
            if value.get("config").is_some() && value.get("timestamp").is_some() {
                let manifest: RunManifest = serde_json::from_value(value)?;
                (manifest.config, Some(manifest.corpus.sha256))
            } else {
                (serde_json::from_value(value)?, None)
            };
        config.resolve_paths(base);
        config.validate()?;
        Ok(LoadedConfig {
            config,
            expected_corpus_sha256,
        })
    }

    /// Makes every relative path absolute against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                let joined = base.join(&*p);
                *p = joined
                    .canonicalize()
                    .or_else(|_| std::path::absolute(&joined))
                    .unwrap_or(joined);
            }
        };
        fix(&mut self.corpus);
        fix(&mut self.lexicon);
        for b in &mut self.backends {
            if let BackendKind::Mock(MockSettings { table: Some(t), .. }) = &mut b.kind {
                fix(t);
            }
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.backends.is_empty() {
            return bad("no backends configured".into());
        }
        for (name, t) in [
            ("verbatim", self.thresholds.verbatim),
            ("traditional", self.thresholds.traditional),
            ("max_error_fraction", self.thresholds.max_error_fraction),
        ] {
            if !(0.0..=1.0).contains(&t) {
                return bad(format!("threshold `{name}` must lie in [0, 1], got {t}"));
            }
        }
        if !(self.analysis.alpha > 0.0 && self.analysis.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.analysis.alpha));
        }
        self.scoring.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        let mut ids = HashSet::new();
        for b in &self.backends {
            if b.id.trim().is_empty() {
                return bad("backend with an empty id".into());
            }
            if !ids.insert(b.id.as_str()) {
                return bad(format!("duplicate backend id `{}`", b.id));
            }
            b.prompts()
                .validate()
                .map_err(|e| PipelineError::Config(format!("backend `{}`: {e}", b.id)))?;
            match &b.kind {
                BackendKind::HttpLlm(h) => {
                    if h.endpoint.trim().is_empty() {
                        return bad(format!("backend `{}` has no endpoint", b.id));
                    }
                    if !(h.temperature >= 0.0 && h.temperature.is_finite()) {
                        return bad(format!("backend `{}`: temperature must be >= 0", b.id));
                    }
                    if !(h.timeout_secs > 0.0 && h.timeout_secs.is_finite()) {
                        return bad(format!("backend `{}`: timeout must be positive", b.id));
                    }
                }
                BackendKind::Mock(m) => {
                    if matches!(m.mock, MockKind::Lexicon | MockKind::Noise) && m.table.is_none() {
                        return bad(format!("backend `{}` needs a `table`", b.id));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOML: &str = r#"
corpus = "corpus.jsonl"
lexicon = "/abs/dict.txt"
repetitions = 2
master_seed = 42

[scoring]
level = "char"

[thresholds]
verbatim = 0.8

[[backends]]
id = "echo"
kind = "mock"
mock = "identity"

[[backends]]
id = "noisy"
kind = "mock"
mock = "noise"
table = "bilingual.tsv"
drop = 0.2
swap = 0.05

[[backends]]
id = "remote"
kind = "http_llm"
endpoint = "http://127.0.0.1:9/v1/chat/completions"
model_name = "m"
temperature = 0
max_retries = 1
prompt_template_forward = "EN please: {text}"
"#;

    #[test]
    fn parses_toml_and_resolves_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, TOML).unwrap();
        let loaded = RunConfig::load(&path).unwrap();
        let c = loaded.config;
        assert_eq!(c.repetitions, 2);
        assert_eq!(c.corpus, dir.path().join("corpus.jsonl"));
        assert_eq!(c.lexicon, PathBuf::from("/abs/dict.txt"));
        assert_eq!(c.thresholds.verbatim, 0.8);
        assert_eq!(c.thresholds.traditional, DEFAULT_TRADITIONAL_THRESHOLD);
        assert_eq!(c.backends.len(), 3);
        match &c.backends[1].kind {
            BackendKind::Mock(m) => {
                assert_eq!(m.mock, MockKind::Noise);
                assert_eq!(m.table.as_deref(), Some(dir.path().join("bilingual.tsv").as_path()));
                assert_eq!(m.drop, 0.2);
            }
            other => panic!("{other:?}"),
        }
        let prompts = c.backends[2].prompts();
        assert_eq!(prompts.forward, vec!["EN please: {text}"]);
        assert_eq!(prompts.backward.len(), 3);
        assert_eq!(c.backends[2].workers(), 1);
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, TOML).unwrap();
        let c = RunConfig::load(&path).unwrap().config;
        let json_path = dir.path().join("run.json");
        std::fs::write(&json_path, serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(RunConfig::load(&json_path).unwrap().config, c);
    }

    #[test]
    fn rejects_invalid_configs() {
        let dir = tempfile::tempdir().unwrap();
        let cases = [
            TOML.replace("repetitions = 2", "repetitions = 0"),
            TOML.replace("id = \"noisy\"", "id = \"echo\""),
            TOML.replace("EN please: {text}", "EN please"),
            TOML.replace("verbatim = 0.8", "verbatim = 1.8"),
            TOML.replace("table = \"bilingual.tsv\"", ""),
        ];
        for (i, text) in cases.iter().enumerate() {
            let path = dir.path().join(format!("bad{i}.toml"));
            std::fs::write(&path, text).unwrap();
            assert!(matches!(RunConfig::load(&path), Err(PipelineError::Config(_))), "case {i}");
        }
    }

    #[test]
    fn missing_api_key_is_a_config_error() {
        let mut settings = HttpSettings::new("http://127.0.0.1:9/");
        settings.api_key_env = Some("ZHBT_TEST_KEY_THAT_IS_NOT_SET".into());
        let b = BackendConfig::http("x", settings);
        assert!(matches!(b.build(), Err(PipelineError::Config(_))));
    }
}
