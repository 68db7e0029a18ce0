//! Round-trip runs: ZHx → EN → ZHy for every sample, backend and repetition.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use zhbt_core::corpus::{Corpus, TextSample};
use zhbt_core::metrics::{fit_idf, Metric, MetricVector, Scorer, ScoringConfig};
use zhbt_core::report::{build_report, write_scores_csv, Report};
use zhbt_core::segmentation::{Lexicon, TokenList, VariantTable};
use zhbt_core::stats::{AnalysisOptions, ExperimentDesign, ScoreMatrix};

use crate::anomaly::Detectors;
use crate::backend::Translator;
use crate::config::RunConfig;
use crate::prompts::{variant_for, Direction, PromptSet};
use crate::PipelineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationRecord {
    pub sample_id: String,
    pub backend_id: String,
    /// 1-based.
    pub repetition: usize,
    pub zhx: String,
    pub en: String,
    pub zhy: String,
    pub seed: u64,
    pub prompt_variant: usize,
    pub verbatim_similarity: Option<f64>,
    pub verbatim_flag: bool,
    pub traditional_flag: bool,
    pub error: Option<String>,
}

/// Seed for one (sample, backend, repetition): the first eight bytes of
/// SHA-256 over the master seed and the length-prefixed identifiers, cut to
/// 53 bits so JSON readers keep it exact.
pub fn derive_seed(master_seed: u64, sample_id: &str, backend_id: &str, repetition: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    for s in [sample_id, backend_id] {
        h.update((s.len() as u64).to_le_bytes());
        h.update(s.as_bytes());
    }
    h.update((repetition as u64).to_le_bytes());
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(first) >> 11
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One repetition: both legs are re-run, then the anomaly flags are set.
pub fn round_trip(
    translator: &dyn Translator,
    backend_id: &str,
    sample: &TextSample,
    repetition: usize,
    variants: usize,
    master_seed: u64,
    detectors: &Detectors<'_>,
) -> TranslationRecord {
    let seed = derive_seed(master_seed, &sample.id, backend_id, repetition);
    let prompt_variant = variant_for(repetition, variants);
    let mut record = TranslationRecord {
        sample_id: sample.id.clone(),
        backend_id: backend_id.to_string(),
        repetition,
        zhx: sample.text.clone(),
        en: String::new(),
        zhy: String::new(),
        seed,
        prompt_variant,
        verbatim_similarity: None,
        verbatim_flag: false,
        traditional_flag: false,
        error: None,
    };
    let legs = translator
        .translate(&sample.text, Direction::ZhToEn, seed, prompt_variant)
        .map_err(|e| format!("forward: {e}"))
        .and_then(|en| {
            record.en = en;
            translator
                .translate(&record.en, Direction::EnToZh, seed, prompt_variant)
                .map_err(|e| format!("backward: {e}"))
        });
    match legs {
        Ok(zhy) if zhy.trim().is_empty() => record.error = Some("backward: empty completion".into()),
        Ok(zhy) => {
            record.zhy = zhy;
            match detectors.verbatim(&record.zhx, &record.zhy) {
                Ok(v) => {
                    record.verbatim_similarity = Some(v.similarity);
                    record.verbatim_flag = v.flagged;
                }
                Err(e) => log::warn!("{}: verbatim check skipped: {e}", sample.id),
            }
            record.traditional_flag = detectors.traditional(&record.zhy);
        }
        Err(e) => record.error = Some(e),
    }
    record
}

/// `r` records for one sample, in repetition order.
pub fn backtranslate(
    translator: &dyn Translator,
    backend_id: &str,
    sample: &TextSample,
    r: usize,
    master_seed: u64,
    prompts: &PromptSet,
    detectors: &Detectors<'_>,
) -> Vec<TranslationRecord> {
    (1..=r)
        .map(|rep| round_trip(translator, backend_id, sample, rep, prompts.variants(), master_seed, detectors))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusInfo {
    pub name: String,
    pub path: PathBuf,
    pub sha256: String,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub timestamp: String,
    pub master_seed: u64,
    pub corpus: CorpusInfo,
    pub lexicon: FileDigest,
    pub design: ExperimentDesign,
    pub backends: Vec<String>,
    pub scoring: ScoringConfig,
    /// Templates in effect for each backend.
    pub prompts: BTreeMap<String, PromptSet>,
    pub records: usize,
    pub errors: usize,
    pub config: RunConfig,
}

/// Inputs already loaded from disk.
pub struct RunInputs<'a> {
    pub corpus: &'a Corpus,
    pub corpus_sha256: String,
    pub lexicon: &'a Lexicon,
    pub lexicon_sha256: String,
    pub variants: &'a VariantTable,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Sorted by (sample_id, backend_id, repetition).
    pub records: Vec<TranslationRecord>,
    /// One matrix per metric, blocks in corpus order, treatments in config order.
    pub matrices: Vec<ScoreMatrix>,
    pub manifest: RunManifest,
    pub warnings: Vec<String>,
}

impl RunOutput {
    pub fn error_count(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn error_fraction(&self) -> f64 {
        if self.records.is_empty() {
            0.0
        } else {
            self.error_count() as f64 / self.records.len() as f64
        }
    }

    pub fn records_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn report(&self, options: &AnalysisOptions) -> Result<Report, PipelineError> {
        Ok(build_report(&self.matrices, options)?)
    }
}

/// Loads the corpus, lexicon and backends named in `config` and runs them.
pub fn run_from_config(config: &RunConfig, expected_corpus_sha256: Option<&str>) -> Result<RunOutput, PipelineError> {
    let read = |p: &Path| {
        std::fs::read(p).map_err(|source| PipelineError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    let corpus_bytes = read(&config.corpus)?;
    let corpus_sha256 = sha256_hex(&corpus_bytes);
    if let Some(expected) = expected_corpus_sha256 {
        if expected != corpus_sha256 {
            return Err(PipelineError::CorpusHashMismatch {
                expected: expected.to_string(),
                actual: corpus_sha256,
            });
        }
    }
    let name = config
        .corpus
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let text = String::from_utf8(corpus_bytes)
        .map_err(|e| PipelineError::Config(format!("corpus is not UTF-8: {e}")))?;
    let corpus = Corpus::parse_str(name, &text)?;
    let lexicon_bytes = read(&config.lexicon)?;
    let lexicon_sha256 = sha256_hex(&lexicon_bytes);
    let lexicon = Lexicon::from_reader(std::io::BufReader::new(lexicon_bytes.as_slice()))?;
    let variants = VariantTable::builtin();
    let backends = config
        .backends
        .iter()
        .map(|b| b.build())
        .collect::<Result<Vec<_>, _>>()?;
    run_experiment(
        config,
        &RunInputs {
            corpus: &corpus,
            corpus_sha256,
            lexicon: &lexicon,
            lexicon_sha256,
            variants: &variants,
        },
        &backends,
    )
}

/// Runs every (sample, backend, repetition) triple. Each backend gets its
/// own worker pool; all backends proceed at once. Failures become records
/// with `error` set and missing matrix cells.
pub fn run_experiment(
    config: &RunConfig,
    inputs: &RunInputs<'_>,
    backends: &[Box<dyn Translator>],
) -> Result<RunOutput, PipelineError> {
    config.validate()?;
    if backends.len() != config.backends.len() {
        return Err(PipelineError::Config(format!(
            "{} backend configs but {} translators",
            config.backends.len(),
            backends.len()
        )));
    }
    let corpus = inputs.corpus;
    let r = config.repetitions;
    let design = ExperimentDesign::new(corpus.len(), backends.len(), r)?;
    let detectors = Detectors {
        lexicon: inputs.lexicon,
        variants: inputs.variants,
        verbatim_threshold: config.thresholds.verbatim,
        traditional_threshold: config.thresholds.traditional,
    };
    let prompts: Vec<PromptSet> = config.backends.iter().map(|b| b.prompts()).collect();
    let collected = Mutex::new(Vec::with_capacity(design.observations()));

    std::thread::scope(|scope| {
        for (b, translator) in backends.iter().enumerate() {
            let backend = &config.backends[b];
            let jobs = corpus.len() * r;
            let workers = backend.workers().min(jobs);
            let (collected, detectors, prompts) = (&collected, &detectors, &prompts);
            scope.spawn(move || {
                let next = AtomicUsize::new(0);
                let next = &next;
                std::thread::scope(|inner| {
                    for _ in 0..workers {
                        inner.spawn(move || loop {
                            let job = next.fetch_add(1, Ordering::Relaxed);
                            if job >= jobs {
                                break;
                            }
                            let (s, rep) = (job / r, job % r + 1);
                            let record = round_trip(
                                translator.as_ref(),
                                &backend.id,
                                &corpus.samples[s],
                                rep,
                                prompts[b].variants(),
                                config.master_seed,
                                detectors,
                            );
                            if let Some(e) = &record.error {
                                log::warn!("{} / {} / rep {rep}: {e}", record.sample_id, backend.id);
                            }
                            collected.lock().unwrap_or_else(|e| e.into_inner()).push(record);
                        });
                    }
                });
                log::info!("backend `{}` finished", backend.id);
            });
        }
    });

    let mut records = collected.into_inner().unwrap_or_else(|e| e.into_inner());
    records.sort_by(|a, b| {
        (&a.sample_id, &a.backend_id, a.repetition).cmp(&(&b.sample_id, &b.backend_id, b.repetition))
    });
    let mut warnings: Vec<String> = records
        .iter()
        .filter_map(|rec| {
            rec.error
                .as_ref()
                .map(|e| format!("{} / {} / rep {}: {e}", rec.sample_id, rec.backend_id, rec.repetition))
        })
        .collect();

    let matrices = score_records(config, inputs, design, &records, &mut warnings)?;
    let errors = records.iter().filter(|r| r.error.is_some()).count();
    let manifest = RunManifest {
        tool: format!("zhbt {}", env!("CARGO_PKG_VERSION")),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        master_seed: config.master_seed,
        corpus: CorpusInfo {
            name: corpus.name.clone(),
            path: config.corpus.clone(),
            sha256: inputs.corpus_sha256.clone(),
            samples: corpus.len(),
        },
        lexicon: FileDigest {
            path: config.lexicon.clone(),
            sha256: inputs.lexicon_sha256.clone(),
        },
        design,
        backends: config.backends.iter().map(|b| b.id.clone()).collect(),
        scoring: config.scoring.clone(),
        prompts: config.backends.iter().map(|b| (b.id.clone(), b.prompts())).collect(),
        records: records.len(),
        errors,
        config: config.clone(),
    };
    Ok(RunOutput {
        records,
        matrices,
        manifest,
        warnings,
    })
}

/// Scores successful records against their source texts. The TF-IDF model
/// is fitted once over every source text and every successful ZHy of the run.
fn score_records(
    config: &RunConfig,
    inputs: &RunInputs<'_>,
    design: ExperimentDesign,
    records: &[TranslationRecord],
    warnings: &mut Vec<String>,
) -> Result<Vec<ScoreMatrix>, PipelineError> {
    let corpus = inputs.corpus;
    let scorer = Scorer::new(inputs.lexicon, &config.scoring);
    let sources: Vec<TokenList> = corpus.iter().map(|s| scorer.tokenize(&s.text)).collect();
    let outputs: Vec<Option<TokenList>> = records
        .iter()
        .map(|r| r.error.is_none().then(|| scorer.tokenize(&r.zhy)))
        .collect();
    let idf = fit_idf(sources.iter().chain(outputs.iter().flatten()))?;

    let block_of: BTreeMap<&str, usize> = corpus.iter().enumerate().map(|(i, s)| (s.id.as_str(), i)).collect();
    let treatment_of: BTreeMap<&str, usize> = config
        .backends
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id.as_str(), i))
        .collect();
    let block_ids: Vec<String> = corpus.iter().map(|s| s.id.clone()).collect();
    let treatment_ids: Vec<String> = config.backends.iter().map(|b| b.id.clone()).collect();
    let mut matrices = Metric::ALL
        .iter()
        .map(|m| ScoreMatrix::new(design, m.name(), block_ids.clone(), treatment_ids.clone()))
        .collect::<Result<Vec<_>, _>>()?;

    for (record, tokens) in records.iter().zip(&outputs) {
        let Some(tokens) = tokens else { continue };
        let b = block_of[record.sample_id.as_str()];
        let t = treatment_of[record.backend_id.as_str()];
        let scored: Result<MetricVector, _> =
            scorer.score_tokens(&record.zhx, &sources[b], &record.zhy, tokens, &idf);
        match scored {
            Ok(v) => {
                for (matrix, metric) in matrices.iter_mut().zip(Metric::ALL) {
                    matrix.set(b, t, record.repetition - 1, Some(v.get(metric)));
                }
            }
            Err(e) => warnings.push(format!(
                "{} / {} / rep {}: not scored: {e}",
                record.sample_id, record.backend_id, record.repetition
            )),
        }
    }
    Ok(matrices)
}

/// Files written by [`write_run`] and anything that went wrong building the
/// statistical report (the run outputs are still complete then).
#[derive(Debug)]
pub struct RunFiles {
    pub written: Vec<PathBuf>,
    pub report_error: Option<PipelineError>,
}

/// Writes `records.jsonl`, `scores.csv`, `manifest.json` and the report
/// bundle into `dir`.
pub fn write_run(dir: &Path, output: &RunOutput, options: &AnalysisOptions) -> Result<RunFiles, PipelineError> {
    std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let write = |name: &str, body: String| -> Result<PathBuf, PipelineError> {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|source| PipelineError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    };
    let mut written = vec![write("records.jsonl", output.records_jsonl())?];
    let scores = dir.join("scores.csv");
    write_scores_csv(&output.matrices, &scores)?;
    written.push(scores);
    let mut manifest = serde_json::to_string_pretty(&output.manifest)?;
    manifest.push('\n');
    written.push(write("manifest.json", manifest)?);
    let report_error = match output.report(options).and_then(|r| Ok(r.emit(dir)?)) {
        Ok(files) => {
            written.extend(files);
            None
        }
        Err(e) => Some(e),
    };
    Ok(RunFiles { written, report_error })
}
