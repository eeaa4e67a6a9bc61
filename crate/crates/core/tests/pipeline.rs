use std::path::{Path, PathBuf};

use trendlens_core::pipeline::{CANDIDATES_FILE, CONFIG_RESOLVED, PROJECTION_FILE, TOP_KEYWORDS_FILE};
use trendlens_core::report::read_projection_csv;
use trendlens_core::{load_corpus, run_pipeline, CorpusFormat, PipelineConfig, PipelineOutcome};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn fixture_config(out: &Path) -> PipelineConfig {
    let mut c = PipelineConfig::from_json_file(fixtures().join("pipeline.json")).unwrap();
    c.out = Some(out.to_path_buf());
    c
}

#[test]
fn fixture_corpus_has_four_industries() {
    let corpus = load_corpus(fixtures().join("patents.jsonl"), CorpusFormat::Jsonl).unwrap();
    assert_eq!(corpus.len(), 60);
    let industries: Vec<&str> = corpus.industries().iter().map(String::as_str).collect();
    assert_eq!(industries, ["Factory", "Medical", "Security", "Transport"]);
}

#[test]
fn fixture_pipeline_completes_consistently() {
    let dir = tempfile::tempdir().unwrap();
    let report = match run_pipeline(fixture_config(dir.path())).unwrap() {
        PipelineOutcome::Completed(r) => r,
        other => panic!("unexpected outcome {other:?}"),
    };
    assert!(report.is_consistent());
    assert_eq!(report.industries.len(), 4);
    for file in [CONFIG_RESOLVED, PROJECTION_FILE, TOP_KEYWORDS_FILE, "scatter_medical.svg"] {
        assert!(dir.path().join(file).exists(), "{file} missing");
    }
    let rows = read_projection_csv(std::fs::File::open(dir.path().join(PROJECTION_FILE)).unwrap()).unwrap();
    assert!(!rows.is_empty());

    let curated = std::fs::read_to_string(fixtures().join("curated_stopwords.txt")).unwrap();
    let keywords = std::fs::read_to_string(dir.path().join("keywords.csv")).unwrap();
    for line in keywords.lines().skip(1) {
        let kw = line.split(',').nth(2).unwrap();
        assert!(!curated.lines().any(|c| c.trim() == kw), "curated {kw} extracted");
    }
}

#[test]
fn missing_curated_list_halts_for_curation() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = fixture_config(dir.path());
    config.extra_stopwords.clear();
    match run_pipeline(config).unwrap() {
        PipelineOutcome::CurationRequired { candidates, count } => {
            assert_eq!(candidates, dir.path().join(CANDIDATES_FILE));
            assert!(count > 0 && count <= 30);
        }
        other => panic!("unexpected outcome {other:?}"),
    }
    assert!(!dir.path().join(PROJECTION_FILE).exists());
}

#[test]
fn query_filters_the_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = fixture_config(dir.path());
    config.query = Some("(Deep Learn*) OR (Machine Learn*) OR (Neural Network)".into());
    assert!(matches!(run_pipeline(config).unwrap(), PipelineOutcome::Completed(_)));

    let mut config = fixture_config(dir.path());
    config.query = Some("'blockchain'".into());
    assert!(run_pipeline(config).is_err());
}
