//! `trendlens` command-line interface.
//!
//! Each subcommand runs one pipeline stage over files; `pipeline` runs them
//! all. Exit codes: 0 success, 1 stage failure, 2 stopword curation
//! required, 64 usage error.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use trendlens_core::corpus::CorpusFormat;
use trendlens_core::embedding::{load_model, save_model, train, TrainingMode};
use trendlens_core::keywords::{
    read_keywords_csv, save_doc_vectors, write_keywords_csv, Embedder, FileEmbedder, ReferenceEmbedder,
    DEFAULT_TOP_N,
};
use trendlens_core::pipeline::{
    analyze, extract_all, load_corpus_auto, load_stopword_lists, plot_projection, prepare_tokens,
    read_corpus_jsonl, resolve_seed, run_pipeline, write_analysis, AnalysisOptions, CorpusQuery,
    PipelineConfig, PipelineError, PipelineOutcome, Stage, StageContext, DEFAULT_CLUSTER_THRESHOLD,
};
use trendlens_core::report::{read_projection_csv, read_tokens_jsonl, write_candidates_csv, write_tokens_jsonl};
use trendlens_core::text::StopwordList;
use trendlens_core::trend::{generate_stopword_candidates, DEFAULT_CANDIDATES, DEFAULT_TOP_PERCENT};

const EXIT_FAILURE: u8 = 1;
const EXIT_CURATION: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "trendlens", version, about = "Patent keyword trend analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load and validate a JSONL/CSV corpus and write it as canonical JSONL.
    Ingest(IngestArgs),
    /// Filter a corpus with a boolean wildcard query.
    Query(QueryArgs),
    /// Tokenize and strip stopwords, or emit stopword candidates for curation.
    Stopwords(StopwordsArgs),
    /// Train skip-gram embeddings on a token file.
    Train(TrainArgs),
    /// Extract top-n keywords per document.
    Extract(ExtractArgs),
    /// Aggregate keywords per industry, project with PCA and cluster.
    Analyze(AnalyzeArgs),
    /// Render per-industry SVG scatter plots from a projection file.
    Plot(PlotArgs),
    /// Run every stage in one go.
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug)]
struct CorpusInput {
    /// Corpus file (JSONL or CSV).
    #[arg(long)]
    corpus: PathBuf,
    /// Corpus format; guessed from the extension when omitted.
    #[arg(long)]
    format: Option<CorpusFormat>,
}

#[derive(Args, Debug, Default)]
struct QueryInput {
    /// Boolean query, e.g. "(Deep Learn*) AND ('medical' OR 'healthcare')".
    #[arg(long, conflicts_with = "query_file")]
    query: Option<String>,
    /// File containing the query.
    #[arg(long)]
    query_file: Option<PathBuf>,
    /// Per-industry query as INDUSTRY=QUERY; repeatable.
    #[arg(long = "industry-query", value_parser = parse_key_value)]
    industry_query: Vec<(String, String)>,
}

#[derive(Args, Debug, Default)]
struct StopwordInput {
    /// Base stopword file; the bundled English list is used when omitted.
    #[arg(long)]
    base_stopwords: Option<PathBuf>,
    /// Curated stopword file; repeatable.
    #[arg(long)]
    extra_stopwords: Vec<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct TrainOverrides {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long = "lr")]
    learning_rate: Option<f64>,
    #[arg(long)]
    min_count: Option<u64>,
    /// full_softmax or negative_sampling.
    #[arg(long)]
    mode: Option<TrainingMode>,
    #[arg(long)]
    negatives: Option<usize>,
    /// Worker threads; 1 is the deterministic mode.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    full_softmax_cap: Option<usize>,
    /// Falls back to TRENDLENS_SEED, then 42.
    #[arg(long)]
    seed: Option<u64>,
}

impl TrainOverrides {
    fn apply(&self, c: &mut PipelineConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(dim, window, epochs, learning_rate, min_count, mode, negatives, threads, full_softmax_cap);
        if self.seed.is_some() {
            c.seed = self.seed;
        }
    }
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    input: CorpusInput,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct QueryArgs {
    #[command(flatten)]
    input: CorpusInput,
    #[command(flatten)]
    query: QueryInput,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct StopwordsArgs {
    #[command(flatten)]
    input: CorpusInput,
    #[command(flatten)]
    stopwords: StopwordInput,
    /// Emit stopword candidates (keyword,doc_frequency) instead of tokens.
    #[arg(long, requires = "model")]
    candidates: bool,
    /// Model used to extract keywords for candidate generation.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CANDIDATES)]
    top_k: usize,
    #[arg(long, default_value_t = DEFAULT_TOP_N)]
    top_n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Token file (JSONL of {"doc_id", "tokens"}).
    #[arg(long)]
    input: PathBuf,
    /// Flat JSON config supplying defaults for the training flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    train: TrainOverrides,
    /// Also write the output (context) vectors.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// Token file (JSONL of {"doc_id", "tokens"}).
    #[arg(long)]
    input: PathBuf,
    /// Skip-gram model used as the reference embedder.
    #[arg(long, required_unless_present = "word_vectors")]
    model: Option<PathBuf>,
    /// Externally produced document vectors (trendlens-docvec format).
    #[arg(long, requires = "word_vectors", conflicts_with = "model")]
    doc_vectors: Option<PathBuf>,
    /// Externally produced word vectors (model format).
    #[arg(long, requires = "doc_vectors", conflicts_with = "model")]
    word_vectors: Option<PathBuf>,
    #[command(flatten)]
    stopwords: StopwordInput,
    #[arg(long, default_value_t = DEFAULT_TOP_N)]
    top_n: usize,
    /// Also write the document vectors used, in trendlens-docvec format.
    #[arg(long)]
    export_doc_vectors: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Canonical JSONL corpus.
    #[arg(long)]
    corpus: PathBuf,
    /// Keyword CSV from `extract`.
    #[arg(long)]
    keywords: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOP_PERCENT)]
    top_percent: f64,
    #[arg(long, default_value_t = DEFAULT_CLUSTER_THRESHOLD)]
    threshold: f64,
    /// Anchor token per industry as INDUSTRY=TOKEN; repeatable.
    #[arg(long, value_parser = parse_key_value)]
    anchor: Vec<(String, String)>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Projection CSV from `analyze`.
    #[arg(long)]
    projection: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    /// Flat JSON config; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    format: Option<CorpusFormat>,
    #[command(flatten)]
    query: QueryInput,
    #[command(flatten)]
    stopwords: StopwordInput,
    /// Use this model instead of training one.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    train: TrainOverrides,
    #[arg(long)]
    full: bool,
    #[arg(long)]
    top_n: Option<usize>,
    #[arg(long)]
    top_percent: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    candidates_top_k: Option<usize>,
    #[arg(long, value_parser = parse_key_value)]
    anchor: Vec<(String, String)>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_key_value(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.to_string()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))
}

enum Outcome {
    Done,
    CurationRequired,
}

type CmdResult = Result<Outcome, PipelineError>;

fn io_error(stage: Stage, path: &Path, e: std::io::Error) -> PipelineError {
    PipelineError::new(stage, format!("{}: {e}", path.display()))
}

fn create(stage: Stage, path: &Path) -> Result<fs::File, PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(stage, dir, e))?;
    }
    fs::File::create(path).map_err(|e| io_error(stage, path, e))
}

fn read_tokens(path: &Path) -> Result<Vec<trendlens_core::TokenStream>, PipelineError> {
    let f = fs::File::open(path).map_err(|e| io_error(Stage::Load, path, e))?;
    read_tokens_jsonl(BufReader::new(f)).stage(Stage::Load)
}

fn cmd_ingest(args: IngestArgs) -> CmdResult {
    let corpus = load_corpus_auto(&args.input.corpus, args.input.format)?;
    info!("{} documents, industries: {:?}", corpus.len(), corpus.industries());
    corpus.write_jsonl(create(Stage::Emit, &args.out)?).stage(Stage::Emit)?;
    Ok(Outcome::Done)
}

fn corpus_query(q: &QueryInput) -> Result<CorpusQuery, PipelineError> {
    let per: BTreeMap<String, String> = q.industry_query.iter().cloned().collect();
    CorpusQuery::build(q.query.as_deref(), q.query_file.as_deref(), &per)
}

fn cmd_query(args: QueryArgs) -> CmdResult {
    let corpus = load_corpus_auto(&args.input.corpus, args.input.format)?;
    let query = corpus_query(&args.query)?;
    if query.is_empty() {
        return Err(PipelineError::new(Stage::Query, "no query given (use --query, --query-file or --industry-query)"));
    }
    if let Some(g) = &query.global {
        info!("query: {g}");
    }
    let filtered = query.apply(&corpus);
    info!("{} of {} documents matched", filtered.len(), corpus.len());
    filtered.write_jsonl(create(Stage::Emit, &args.out)?).stage(Stage::Emit)?;
    Ok(Outcome::Done)
}

fn cmd_stopwords(args: StopwordsArgs) -> CmdResult {
    let corpus = load_corpus_auto(&args.input.corpus, args.input.format)?;
    let (base, extras) = load_stopword_lists(args.stopwords.base_stopwords.as_deref(), &args.stopwords.extra_stopwords)?;
    if args.candidates {
        let model = load_model(args.model.as_deref().expect("clap enforces --model")).stage(Stage::Load)?;
        let candidates = generate_stopword_candidates(&corpus, &ReferenceEmbedder::new(&model), &base, args.top_k, args.top_n)
            .stage(Stage::Stopwords)?;
        write_candidates_csv(create(Stage::Emit, &args.out)?, &candidates).stage(Stage::Emit)?;
        info!("wrote {} stopword candidates to {}", candidates.len(), args.out.display());
        return Ok(Outcome::Done);
    }
    let mut lists: Vec<&StopwordList> = vec![&base];
    lists.extend(extras.iter());
    let streams = prepare_tokens(&corpus, &lists);
    write_tokens_jsonl(create(Stage::Emit, &args.out)?, &streams).stage(Stage::Emit)?;
    Ok(Outcome::Done)
}

fn cmd_train(args: TrainArgs) -> CmdResult {
    let mut config = match &args.config {
        Some(p) => PipelineConfig::from_json_file(p)?,
        None => PipelineConfig::default(),
    };
    args.train.apply(&mut config);
    let seed = resolve_seed(config.seed)?;
    let streams = read_tokens(&args.input)?;
    let model = train(&streams, &config.train_config(seed)).stage(Stage::Train)?;
    info!("trained V={} D={} seed={}", model.vocab.len(), model.dim(), model.seed());
    create(Stage::Emit, &args.out)?;
    save_model(&model, &args.out, args.full).stage(Stage::Emit)?;
    Ok(Outcome::Done)
}

fn export_doc_vectors<E: Embedder>(
    embedder: &E,
    streams: &[trendlens_core::TokenStream],
    lists: &[&StopwordList],
    path: &Path,
) -> Result<(), PipelineError> {
    let vectors: Vec<(String, Vec<f64>)> = streams
        .iter()
        .filter_map(|s| {
            let filtered = trendlens_core::filter_stopwords(s, lists);
            embedder.embed_document(&filtered).ok().map(|v| (s.doc_id.clone(), v))
        })
        .collect();
    create(Stage::Emit, path)?;
    save_doc_vectors(path, embedder.dim(), &vectors).stage(Stage::Emit)
}

fn cmd_extract(args: ExtractArgs) -> CmdResult {
    let streams = read_tokens(&args.input)?;
    let (base, extras) = load_stopword_lists(args.stopwords.base_stopwords.as_deref(), &args.stopwords.extra_stopwords)?;
    let mut lists: Vec<&StopwordList> = vec![&base];
    lists.extend(extras.iter());

    let results = match (&args.model, &args.doc_vectors, &args.word_vectors) {
        (Some(m), _, _) => {
            let model = load_model(m).stage(Stage::Load)?;
            let embedder = ReferenceEmbedder::new(&model);
            if let Some(p) = &args.export_doc_vectors {
                export_doc_vectors(&embedder, &streams, &lists, p)?;
            }
            extract_all(&streams, &embedder, &lists, args.top_n)?
        }
        (None, Some(d), Some(w)) => {
            let embedder = FileEmbedder::load(d, w).stage(Stage::Load)?;
            if let Some(p) = &args.export_doc_vectors {
                export_doc_vectors(&embedder, &streams, &lists, p)?;
            }
            extract_all(&streams, &embedder, &lists, args.top_n)?
        }
        _ => unreachable!("clap enforces an embedder source"),
    };
    write_keywords_csv(create(Stage::Emit, &args.out)?, &results).stage(Stage::Emit)?;
    Ok(Outcome::Done)
}

fn cmd_analyze(args: AnalyzeArgs) -> CmdResult {
    let corpus = read_corpus_jsonl(&args.corpus)?;
    let f = fs::File::open(&args.keywords).map_err(|e| io_error(Stage::Load, &args.keywords, e))?;
    let results = read_keywords_csv(BufReader::new(f)).stage(Stage::Load)?;
    let model = load_model(&args.model).stage(Stage::Load)?;
    if !(args.threshold.is_finite() && args.threshold > 0.0) {
        return Err(PipelineError::new(Stage::Config, "--threshold must be positive"));
    }
    let options = AnalysisOptions {
        top_percent: args.top_percent,
        cluster_threshold: args.threshold,
        anchors: args.anchor.into_iter().collect(),
    };
    let report = analyze(&corpus, &results, &model, &options)?;
    for t in &report.industries {
        info!("{}: {} of {} keywords selected, {} clusters", t.industry, t.top_keywords.len(), t.frequencies.len(), t.clusters.len());
    }
    write_analysis(&report, &args.out_dir)?;
    Ok(Outcome::Done)
}

fn cmd_plot(args: PlotArgs) -> CmdResult {
    let f = fs::File::open(&args.projection).map_err(|e| io_error(Stage::Load, &args.projection, e))?;
    let rows = read_projection_csv(BufReader::new(f)).stage(Stage::Load)?;
    for p in plot_projection(&rows, &args.out_dir)? {
        info!("wrote {}", p.display());
    }
    Ok(Outcome::Done)
}

fn cmd_pipeline(args: PipelineArgs) -> CmdResult {
    let mut config = match &args.config {
        Some(p) => PipelineConfig::from_json_file(p)?,
        None => PipelineConfig::default(),
    };
    if args.corpus.is_some() {
        config.corpus = args.corpus;
    }
    if args.format.is_some() {
        config.format = args.format;
    }
    if args.query.query.is_some() || args.query.query_file.is_some() {
        config.query = args.query.query;
        config.query_file = args.query.query_file;
    }
    config.industry_queries.extend(args.query.industry_query);
    if args.stopwords.base_stopwords.is_some() {
        config.base_stopwords = args.stopwords.base_stopwords;
    }
    if !args.stopwords.extra_stopwords.is_empty() {
        config.extra_stopwords = args.stopwords.extra_stopwords;
    }
    if args.model.is_some() {
        config.model = args.model;
    }
    args.train.apply(&mut config);
    config.full_model |= args.full;
    if let Some(v) = args.top_n {
        config.top_n = v;
    }
    if let Some(v) = args.top_percent {
        config.top_percent = v;
    }
    if let Some(v) = args.threshold {
        config.cluster_threshold = v;
    }
    if let Some(v) = args.candidates_top_k {
        config.candidates_top_k = v;
    }
    config.anchors.extend(args.anchor);
    if args.out.is_some() {
        config.out = args.out;
    }

    match run_pipeline(config)? {
        PipelineOutcome::Completed(report) => {
            info!(
                "pipeline complete: {} documents, {} industries",
                report.corpus_documents,
                report.industries.len()
            );
            Ok(Outcome::Done)
        }
        PipelineOutcome::CurationRequired { candidates, count } => {
            eprintln!(
                "curation required: review the {count} candidates in {}, write the patent-specific ones to a \
                 stopword file and rerun with --extra-stopwords",
                candidates.display()
            );
            Ok(Outcome::CurationRequired)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };

    let result = match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Query(a) => cmd_query(a),
        Command::Stopwords(a) => cmd_stopwords(a),
        Command::Train(a) => cmd_train(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Pipeline(a) => cmd_pipeline(a),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::CurationRequired) => ExitCode::from(EXIT_CURATION),
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
