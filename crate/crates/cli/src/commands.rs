use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde_json::Value;
use zhbt_core::corpus::{validate_corpus, Corpus, ValidationPolicy, WarningKind};
use zhbt_core::metrics::{score_pair, MetricVector, ScoringConfig};
use zhbt_core::report::{build_report, format_float, read_scores_csv, render_friedman, render_pairwise, Report};
use zhbt_core::segmentation::{segment, Level, Lexicon};
use zhbt_core::stats::{analyze, AnalysisOptions, ScoreMatrix};
use zhbt_pipeline::config::load_value;
use zhbt_pipeline::{run_from_config, write_run, RunConfig};

use crate::{Command, Format, LevelArg};

type CmdResult = Result<ExitCode, String>;

pub fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Segment {
            text,
            file,
            lexicon,
            level,
            lines,
        } => segment_cmd(text, file, lexicon, level, lines),
        Command::Score {
            original,
            candidate,
            config,
            lexicon,
            level,
            format,
        } => score_cmd(&original, &candidate, config, lexicon, level, format),
        Command::Run {
            config,
            out,
            seed,
            threshold,
        } => run_cmd(&config, &out, seed, threshold),
        Command::Stats {
            scores,
            out,
            config,
            format,
        } => stats_cmd(&scores, out, config, format),
        Command::Report { run_dir, out, config } => report_cmd(&run_dir, out, config),
        Command::Validate {
            corpus,
            config,
            threshold,
            format,
        } => validate_cmd(corpus, config, threshold, format),
    }
}

fn level_of(arg: LevelArg) -> Level {
    match arg {
        LevelArg::Word => Level::Word,
        LevelArg::Char => Level::Character,
    }
}

fn read_text(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read `{}`: {e}", path.display()))
}

/// The lexicon for `level`: an explicit path wins, then `ZHBT_LEXICON`.
/// Character level needs none.
fn load_lexicon(path: Option<PathBuf>, level: Level) -> Result<Lexicon, String> {
    let path = path.or_else(|| std::env::var_os("ZHBT_LEXICON").map(PathBuf::from));
    match (path, level) {
        (Some(p), _) => Lexicon::load(&p).map_err(|e| e.to_string()),
        (None, Level::Character) => Ok(Lexicon::new()),
        (None, Level::Word) => Err("word-level segmentation needs --lexicon (or ZHBT_LEXICON)".into()),
    }
}

fn segment_cmd(
    text: Option<String>,
    file: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    level: LevelArg,
    lines: bool,
) -> CmdResult {
    let level = level_of(level);
    let input = match (text, file) {
        (Some(t), _) => t,
        (None, Some(f)) => read_text(&f)?,
        (None, None) => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| e.to_string())?;
            s
        }
    };
    let lexicon = load_lexicon(lexicon, level)?;
    let mut out = String::new();
    for line in input.lines() {
        let tokens = segment(line, level, &lexicon);
        if lines {
            for t in &tokens.tokens {
                out.push_str(t);
                out.push('\n');
            }
        } else {
            out.push_str(&tokens.join("/"));
            out.push('\n');
        }
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

/// `scoring` and `lexicon` from a run config or a bare scoring file.
fn scoring_from(config: Option<&Path>) -> Result<(ScoringConfig, Option<PathBuf>), String> {
    let Some(path) = config else {
        return Ok((ScoringConfig::default(), None));
    };
    let value = load_value(path).map_err(|e| e.to_string())?;
    let base = path.parent().unwrap_or(Path::new("."));
    let lexicon = value.get("lexicon").and_then(Value::as_str).map(|p| base.join(p));
    let section = value.get("scoring").cloned().unwrap_or_else(|| {
        let mut v = value.clone();
        if let Some(obj) = v.as_object_mut() {
            obj.remove("lexicon");
        }
        v
    });
    let scoring: ScoringConfig =
        serde_json::from_value(section).map_err(|e| format!("{}: bad scoring config: {e}", path.display()))?;
    scoring.validate().map_err(|e| e.to_string())?;
    Ok((scoring, lexicon))
}

fn analysis_from(config: Option<&Path>) -> Result<AnalysisOptions, String> {
    let Some(path) = config else {
        return Ok(AnalysisOptions::default());
    };
    let value = load_value(path).map_err(|e| e.to_string())?;
    let section = value
        .get("analysis")
        .or_else(|| value.get("config").and_then(|c| c.get("analysis")))
        .cloned()
        .unwrap_or(Value::Object(Default::default()));
    let options: AnalysisOptions =
        serde_json::from_value(section).map_err(|e| format!("{}: bad analysis options: {e}", path.display()))?;
    if !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(format!("alpha must lie in (0, 1), got {}", options.alpha));
    }
    Ok(options)
}

fn score_cmd(
    original: &Path,
    candidate: &Path,
    config: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    level: Option<LevelArg>,
    format: Format,
) -> CmdResult {
    let (mut scoring, config_lexicon) = scoring_from(config.as_deref())?;
    if let Some(l) = level {
        scoring.level = level_of(l);
    }
    let orig = read_text(original)?;
    let cand = read_text(candidate)?;
    if cand.trim().is_empty() {
        return Err(format!("candidate `{}` is empty", candidate.display()));
    }
    if orig.trim().is_empty() {
        return Err(format!("original `{}` is empty", original.display()));
    }
    let lexicon = load_lexicon(lexicon.or(config_lexicon), scoring.level)?;
    let v = score_pair(&orig, &cand, &lexicon, &scoring).map_err(|e| e.to_string())?;
    print!("{}", render_vector(&v, format)?);
    Ok(ExitCode::SUCCESS)
}

fn render_vector(v: &MetricVector, format: Format) -> Result<String, String> {
    match format {
        Format::Json => Ok(serde_json::to_string(v).map_err(|e| e.to_string())? + "\n"),
        Format::Csv => Ok(format!(
            "bleu,bleu_unif,chrf,ter,semantic_similarity\n{},{},{},{},{}\n",
            v.bleu, v.bleu_unif, v.chrf, v.ter, v.semantic_similarity
        )),
    }
}

fn run_cmd(config: &Path, out: &Path, seed: Option<u64>, threshold: Option<f64>) -> CmdResult {
    let loaded = RunConfig::load(config).map_err(|e| e.to_string())?;
    let mut cfg = loaded.config;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(t) = threshold {
        cfg.thresholds.verbatim = t;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    let output = run_from_config(&cfg, loaded.expected_corpus_sha256.as_deref()).map_err(|e| e.to_string())?;
    let files = write_run(out, &output, &cfg.analysis).map_err(|e| e.to_string())?;
    let mut warnings = output.warnings.len();
    if let Some(e) = &files.report_error {
        eprintln!("warning: report not written: {e}");
        warnings += 1;
    }
    let flagged_verbatim = output.records.iter().filter(|r| r.verbatim_flag).count();
    let flagged_traditional = output.records.iter().filter(|r| r.traditional_flag).count();
    eprintln!(
        "{} records ({} failed), {} verbatim, {} traditional, {warnings} warning(s); wrote {} files to {}",
        output.records.len(),
        output.error_count(),
        flagged_verbatim,
        flagged_traditional,
        files.written.len(),
        out.display()
    );
    if output.error_fraction() > cfg.thresholds.max_error_fraction {
        eprintln!(
            "error: {:.1}% of records failed (limit {:.1}%)",
            100.0 * output.error_fraction(),
            100.0 * cfg.thresholds.max_error_fraction
        );
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn load_matrices(paths: &[PathBuf]) -> Result<Vec<ScoreMatrix>, String> {
    let mut all: Vec<ScoreMatrix> = Vec::new();
    for p in paths {
        for m in read_scores_csv(p).map_err(|e| e.to_string())? {
            if all.iter().any(|x| x.metric == m.metric) {
                return Err(format!("metric `{}` appears in more than one input", m.metric));
            }
            all.push(m);
        }
    }
    Ok(all)
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create `{}`: {e}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| format!("cannot write `{}`: {e}", path.display()))
}

fn stats_cmd(scores: &[PathBuf], out: Option<PathBuf>, config: Option<PathBuf>, format: Format) -> CmdResult {
    let options = analysis_from(config.as_deref())?;
    let matrices = load_matrices(scores)?;
    let analyses = matrices
        .iter()
        .map(|m| analyze(m, &options))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let friedman = render_friedman(&analyses).map_err(|e| e.to_string())?;
    let pairwise = render_pairwise(&analyses, false).map_err(|e| e.to_string())?;
    let significant = render_pairwise(&analyses, true).map_err(|e| e.to_string())?;
    let json = || -> Result<String, String> {
        let v = serde_json::json!({"options": options, "metrics": analyses});
        Ok(serde_json::to_string_pretty(&v).map_err(|e| e.to_string())? + "\n")
    };
    match (out, format) {
        (Some(dir), format) => {
            write_file(&dir, "friedman.csv", &friedman)?;
            write_file(&dir, "pairwise_tests.csv", &pairwise)?;
            write_file(&dir, "significant_pairs.csv", &significant)?;
            if format == Format::Json {
                write_file(&dir, "stats.json", &json()?)?;
            }
        }
        (None, Format::Csv) => print!("{pairwise}"),
        (None, Format::Json) => print!("{}", json()?),
    }
    for a in &analyses {
        let n = a.significant_pairs().count();
        eprintln!(
            "{}: Friedman chi2 = {:.4}, p = {:.4}; {n} significant pair(s)",
            a.metric, a.friedman.statistic, a.friedman.p_value
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn report_cmd(run_dir: &Path, out: Option<PathBuf>, config: Option<PathBuf>) -> CmdResult {
    let scores = run_dir.join("scores.csv");
    if !scores.is_file() {
        return Err(format!("no scores.csv in `{}`", run_dir.display()));
    }
    let manifest = run_dir.join("manifest.json");
    let options = match config {
        Some(c) => analysis_from(Some(&c))?,
        None if manifest.is_file() => analysis_from(Some(&manifest))?,
        None => AnalysisOptions::default(),
    };
    let matrices = read_scores_csv(&scores).map_err(|e| e.to_string())?;
    let report: Report = build_report(&matrices, &options).map_err(|e| e.to_string())?;
    let dir = out.unwrap_or_else(|| run_dir.to_path_buf());
    let written = report.emit(&dir).map_err(|e| e.to_string())?;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for p in written {
        writeln!(lock, "{}", p.display()).map_err(|e| e.to_string())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn validate_cmd(corpus: Option<PathBuf>, config: Option<PathBuf>, threshold: Option<f64>, format: Format) -> CmdResult {
    if corpus.is_none() && config.is_none() {
        return Err("nothing to validate: give a corpus path and/or --config".into());
    }
    let mut corpus_path = corpus;
    if let Some(c) = &config {
        let loaded = RunConfig::load(c).map_err(|e| e.to_string())?;
        for b in &loaded.config.backends {
            if let zhbt_pipeline::BackendKind::Mock(_) = b.kind {
                b.build().map_err(|e| e.to_string())?;
            }
        }
        eprintln!("config `{}`: {} backend(s), r = {}", c.display(), loaded.config.backends.len(), loaded.config.repetitions);
        corpus_path.get_or_insert(loaded.config.corpus);
    }
    let Some(path) = corpus_path else {
        return Ok(ExitCode::SUCCESS);
    };
    let corpus = Corpus::parse_path(&path).map_err(|e| e.to_string())?;
    let mut policy = ValidationPolicy::default();
    if let Some(t) = threshold {
        if !(0.0..=1.0).contains(&t) {
            return Err(format!("--threshold must lie in [0, 1], got {t}"));
        }
        policy.traditional_threshold = t;
    }
    let warnings = validate_corpus(&corpus, &policy);
    match format {
        Format::Json => {
            let v = serde_json::json!({"corpus": corpus.name, "samples": corpus.len(), "warnings": warnings});
            println!("{}", serde_json::to_string_pretty(&v).map_err(|e| e.to_string())?);
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(std::io::stdout());
            w.write_record(["sample_id", "kind", "value", "message"]).map_err(|e| e.to_string())?;
            for warning in &warnings {
                let (kind, value) = match warning.kind {
                    WarningKind::TraditionalDetected { ratio } => ("traditional_detected", format_float(ratio)),
                    WarningKind::TooShort { chars } => ("too_short", chars.to_string()),
                };
                w.write_record([warning.sample_id.as_str(), kind, &value, &warning.to_string()])
                    .map_err(|e| e.to_string())?;
            }
            w.flush().map_err(|e| e.to_string())?;
        }
    }
    eprintln!("{}: {} sample(s), {} warning(s)", corpus.name, corpus.len(), warnings.len());
    Ok(ExitCode::SUCCESS)
}
