//! Round-trip translation runs (Chinese → English → Chinese) against mock
//! or HTTP backends, with seeded repetitions and anomaly flags.

pub mod anomaly;
pub mod backend;
pub mod config;
pub mod prompts;
pub mod run;

use std::path::PathBuf;

use thiserror::Error;

pub use anomaly::{detect_verbatim, Detectors, VerbatimCheck};
pub use backend::{TranslateError, Translator};
pub use config::{BackendConfig, BackendKind, LoadedConfig, MockKind, MockSettings, RunConfig, Thresholds};
pub use prompts::{Direction, PromptSet};
pub use run::{
    backtranslate, derive_seed, round_trip, run_experiment, run_from_config, write_run, RunFiles, RunInputs,
    RunManifest, RunOutput, TranslationRecord,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("cannot access `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus hash {actual} does not match the manifest ({expected})")]
    CorpusHashMismatch { expected: String, actual: String },
    #[error(transparent)]
    Corpus(#[from] zhbt_core::corpus::CorpusError),
    #[error(transparent)]
    Lexicon(#[from] zhbt_core::segmentation::LexiconError),
    #[error(transparent)]
    Mock(#[from] backend::MockError),
    #[error(transparent)]
    Metric(#[from] zhbt_core::metrics::MetricError),
    #[error(transparent)]
    Stats(#[from] zhbt_core::stats::StatsError),
    #[error(transparent)]
    Report(#[from] zhbt_core::report::ReportError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
