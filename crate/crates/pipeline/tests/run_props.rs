use std::path::PathBuf;
use std::sync::OnceLock;

use proptest::prelude::*;
use zhbt_core::corpus::{Corpus, TextSample};
use zhbt_core::segmentation::{Lexicon, VariantTable};
use zhbt_pipeline::backend::{FailingMock, IdentityMock, LexiconMock, NoiseMock};
use zhbt_pipeline::{
    backtranslate, run_experiment, run_from_config, write_run, BackendConfig, Detectors, Direction, MockSettings,
    PromptSet, RunConfig, RunInputs, TranslateError, Translator,
};

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn lexicon() -> &'static Lexicon {
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(|| Lexicon::load(data("lexicon/jieba_dict.txt")).unwrap())
}

fn table() -> LexiconMock {
    LexiconMock::load(data("mock/bilingual.tsv")).unwrap()
}

fn detectors<'a>(variants: &'a VariantTable) -> Detectors<'a> {
    Detectors {
        lexicon: lexicon(),
        variants,
        verbatim_threshold: 0.7,
        traditional_threshold: 0.05,
    }
}

fn sample() -> TextSample {
    let corpus = Corpus::parse_path(data("corpus/che89_synthetic.jsonl")).unwrap();
    corpus.samples[0].clone()
}

#[test]
fn identity_repetitions_are_verbatim() {
    let variants = VariantTable::builtin();
    let s = sample();
    let recs = backtranslate(&IdentityMock, "echo", &s, 3, 1, &PromptSet::default(), &detectors(&variants));
    assert_eq!(recs.len(), 3);
    for (i, r) in recs.iter().enumerate() {
        assert_eq!(r.repetition, i + 1);
        assert_eq!(r.prompt_variant, i);
        assert_eq!(r.zhy, r.zhx);
        assert!(r.verbatim_flag);
        assert_eq!(r.verbatim_similarity, Some(1.0));
        assert!(r.error.is_none());
    }
    let seeds: std::collections::BTreeSet<u64> = recs.iter().map(|r| r.seed).collect();
    assert_eq!(seeds.len(), 3);
}

#[test]
fn noise_repetitions_differ_and_replay() {
    let variants = VariantTable::builtin();
    let noisy = NoiseMock::new(table(), 0.3, 0.0).unwrap();
    let s = sample();
    let run = || backtranslate(&noisy, "noisy", &s, 3, 42, &PromptSet::default(), &detectors(&variants));
    let a = run();
    assert_eq!(a, run());
    let outs: std::collections::BTreeSet<&str> = a.iter().map(|r| r.zhy.as_str()).collect();
    assert_eq!(outs.len(), 3, "{outs:?}");
    assert!(a.iter().all(|r| r.zhy != r.zhx && !r.zhy.is_empty()));
}

#[test]
fn failing_backend_yields_error_records() {
    let variants = VariantTable::builtin();
    let recs = backtranslate(&FailingMock::default(), "down", &sample(), 3, 1, &PromptSet::default(), &detectors(&variants));
    assert_eq!(recs.len(), 3);
    for r in &recs {
        assert!(r.error.as_deref().unwrap().starts_with("forward:"));
        assert!(r.zhy.is_empty());
        assert!(!r.verbatim_flag && !r.traditional_flag);
    }
}

/// Returns a fixed traditional-script rendering on the way back.
struct Traditionalizer;

impl Translator for Traditionalizer {
    fn translate(&self, text: &str, direction: Direction, _: u64, _: usize) -> Result<String, TranslateError> {
        Ok(match direction {
            Direction::ZhToEn => text.to_string(),
            Direction::EnToZh => "元素觀點：物質由元素組成".to_string(),
        })
    }
}

#[test]
fn traditional_output_is_flagged() {
    let variants = VariantTable::builtin();
    let s = TextSample::new("T1", "chemistry", "元素观点：物质由元素组成");
    let recs = backtranslate(&Traditionalizer, "gemini", &s, 1, 1, &PromptSet::default(), &detectors(&variants));
    assert!(recs[0].traditional_flag);
    let plain = backtranslate(&IdentityMock, "echo", &s, 1, 1, &PromptSet::default(), &detectors(&variants));
    assert!(!plain[0].traditional_flag);
}

fn config(backends: Vec<BackendConfig>, r: usize) -> RunConfig {
    RunConfig {
        corpus: data("corpus/che89_synthetic.jsonl"),
        lexicon: data("lexicon/jieba_dict.txt"),
        repetitions: r,
        master_seed: 7,
        scoring: Default::default(),
        analysis: Default::default(),
        thresholds: Default::default(),
        backends,
    }
}

fn inputs<'a>(corpus: &'a Corpus, variants: &'a VariantTable) -> RunInputs<'a> {
    RunInputs {
        corpus,
        corpus_sha256: "test".into(),
        lexicon: lexicon(),
        lexicon_sha256: "test".into(),
        variants,
    }
}

#[test]
fn single_identity_cell() {
    let corpus = Corpus::parse_str("one", r#"{"id":"X1","domain":"d","text":"化学工程领域的计算"}"#).unwrap();
    let variants = VariantTable::builtin();
    let cfg = config(vec![BackendConfig::mock("echo", MockSettings::identity())], 1);
    let out = run_experiment(&cfg, &inputs(&corpus, &variants), &[Box::new(IdentityMock)]).unwrap();
    assert_eq!(out.records.len(), 1);
    let cell: Vec<f64> = out.matrices.iter().map(|m| m.get(0, 0, 0).unwrap()).collect();
    assert_eq!(cell, vec![1.0, 1.0, 1.0, 0.0, 1.0]);
    assert_eq!(out.manifest.design.observations(), 1);
}

/// Fails whenever the seed is divisible by `every`.
struct Flaky {
    every: u64,
}

impl Translator for Flaky {
    fn translate(&self, text: &str, direction: Direction, seed: u64, v: usize) -> Result<String, TranslateError> {
        if seed.is_multiple_of(self.every) {
            return Err(TranslateError::Backend("flaky".into()));
        }
        IdentityMock.translate(text, direction, seed, v)
    }
}

fn small_corpus(n: usize) -> Corpus {
    let full = Corpus::parse_path(data("corpus/che89_synthetic.jsonl")).unwrap();
    Corpus {
        name: "small".into(),
        samples: full.samples[..n].to_vec(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_triple_appears_once(n in 2usize..6, k in 1usize..4, r in 1usize..4, every in 2u64..5, workers in 1usize..5) {
        let corpus = small_corpus(n);
        let variants = VariantTable::builtin();
        let backends: Vec<BackendConfig> = (0..k)
            .map(|i| BackendConfig { workers: Some(workers), ..BackendConfig::mock(format!("b{i}"), MockSettings::identity()) })
            .collect();
        let translators: Vec<Box<dyn Translator>> = (0..k).map(|_| Box::new(Flaky { every }) as Box<dyn Translator>).collect();
        let out = run_experiment(&config(backends, r), &inputs(&corpus, &variants), &translators).unwrap();
        prop_assert_eq!(out.records.len(), n * k * r);
        let mut keys: Vec<(String, String, usize)> =
            out.records.iter().map(|x| (x.sample_id.clone(), x.backend_id.clone(), x.repetition)).collect();
        let sorted = keys.clone();
        keys.sort();
        keys.dedup();
        prop_assert_eq!(&keys, &sorted);
        prop_assert_eq!(keys.len(), n * k * r);
        for m in &out.matrices {
            prop_assert_eq!(m.missing_count(), out.error_count());
        }
        for x in &out.records {
            prop_assert_eq!(x.zhy.is_empty(), x.error.is_some());
            prop_assert!((1..=r).contains(&x.repetition));
        }
    }
}

#[test]
fn worker_count_does_not_change_output() {
    let corpus = small_corpus(6);
    let variants = VariantTable::builtin();
    let run = |workers: usize| {
        let backends: Vec<BackendConfig> = ["a", "b"]
            .iter()
            .map(|id| BackendConfig {
                workers: Some(workers),
                ..BackendConfig::mock(*id, MockSettings::noise(data("mock/bilingual.tsv"), 0.2, 0.1))
            })
            .collect();
        let translators: Vec<Box<dyn Translator>> = (0..2)
            .map(|_| Box::new(NoiseMock::new(table(), 0.2, 0.1).unwrap()) as Box<dyn Translator>)
            .collect();
        run_experiment(&config(backends, 3), &inputs(&corpus, &variants), &translators).unwrap()
    };
    let (a, b) = (run(1), run(8));
    assert_eq!(a.records_jsonl(), b.records_jsonl());
    assert_eq!(a.matrices, b.matrices);
}

#[test]
fn config_run_writes_outputs_and_replays_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        vec![
            BackendConfig::mock("clean", MockSettings::lexicon(data("mock/bilingual.tsv"))),
            BackendConfig::mock("noisy", MockSettings::noise(data("mock/bilingual.tsv"), 0.25, 0.1)),
            BackendConfig::mock("down", MockSettings::failing()),
        ],
        2,
    );
    let out = run_from_config(&cfg, None).unwrap();
    assert_eq!(out.records.len(), 89 * 3 * 2);
    assert_eq!(out.error_count(), 89 * 2);
    let files = write_run(dir.path(), &out, &cfg.analysis).unwrap();
    assert!(files.report_error.is_none(), "{:?}", files.report_error);
    for name in ["records.jsonl", "scores.csv", "manifest.json", "plot_bundle.json", "significant_pairs.csv"] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }

    let loaded = RunConfig::load(dir.path().join("manifest.json")).unwrap();
    assert_eq!(loaded.config, cfg);
    let replay = run_from_config(&loaded.config, loaded.expected_corpus_sha256.as_deref()).unwrap();
    assert_eq!(replay.records_jsonl(), out.records_jsonl());

    let mut tampered = loaded.clone();
    tampered.expected_corpus_sha256 = Some("0".repeat(64));
    assert!(run_from_config(&tampered.config, tampered.expected_corpus_sha256.as_deref()).is_err());
}
