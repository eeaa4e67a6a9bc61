//! End-to-end orchestration: load → filter → tokenize → (stopword
//! candidates and halt, when no curated list is given) → train → extract →
//! aggregate → top-percent → PCA → cluster → emit.
//!
//! Every stage is also exposed on its own so that the CLI subcommands can
//! run the same code over files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{load_corpus, read_jsonl, Corpus, CorpusFormat, PatentDocument};
use crate::embedding::{cosine_similarity, load_model, save_model, train, EmbeddingModel, TrainConfig, TrainingMode};
use crate::keywords::{extract_keywords, write_keywords_csv, Embedder, ExtractionResult, ReferenceEmbedder, DEFAULT_TOP_N};
use crate::query::{parse_query, QueryExpr};
use crate::report::{
    projection_by_industry, write_anchor_csv, write_candidates_csv, write_distances_csv, write_frequency_csv,
    write_projection_csv, write_tokens_jsonl, AnchorRow, DistanceRow, ProjectionRow,
};
use crate::svg::emit_scatter_svg;
use crate::text::{filter_stopwords, tokenize, StopwordList, StopwordTier, TokenStream};
use crate::trend::{
    aggregate_keywords, cluster_points, fit_pca, generate_stopword_candidates, pairwise_distances, select_top_percent,
    ClusterAssignment, PcaBasis, ProjectedPoint, DEFAULT_CANDIDATES, DEFAULT_TOP_PERCENT,
};

pub const SEED_ENV: &str = "TRENDLENS_SEED";
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_CLUSTER_THRESHOLD: f64 = 0.5;

pub const CONFIG_RESOLVED: &str = "config.resolved";
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const TOKENS_FILE: &str = "tokens.jsonl";
pub const MODEL_FILE: &str = "model.w2v";
pub const KEYWORDS_FILE: &str = "keywords.csv";
pub const CANDIDATES_FILE: &str = "stopword_candidates.csv";
pub const FREQUENCIES_FILE: &str = "keyword_frequencies.csv";
pub const TOP_KEYWORDS_FILE: &str = "top_keywords.csv";
pub const PROJECTION_FILE: &str = "projection.csv";
pub const DISTANCES_FILE: &str = "keyword_distances.csv";
pub const ANCHOR_FILE: &str = "anchor_similarity.csv";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Load,
    Query,
    Stopwords,
    Train,
    Extract,
    Aggregate,
    Select,
    Pca,
    Emit,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Query => "query",
            Stage::Stopwords => "stopwords",
            Stage::Train => "train",
            Stage::Extract => "extract",
            Stage::Aggregate => "aggregate",
            Stage::Select => "select",
            Stage::Pca => "pca",
            Stage::Emit => "emit",
        })
    }
}

#[derive(Debug, Error)]
#[error("{stage} stage failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Box<dyn std::error::Error + Send + Sync>,
}

impl PipelineError {
    pub fn new<E: Into<Box<dyn std::error::Error + Send + Sync>>>(stage: Stage, source: E) -> Self {
        Self {
            stage,
            source: source.into(),
        }
    }
}

/// Attaches a stage to any error.
pub trait StageContext<T> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T, E: Into<Box<dyn std::error::Error + Send + Sync>>> StageContext<T> for Result<T, E> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError::new(stage, e))
    }
}

/// Flat pipeline configuration. Relative paths in a config file are resolved
/// against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub format: Option<CorpusFormat>,
    pub query: Option<String>,
    pub query_file: Option<PathBuf>,
    pub industry_queries: BTreeMap<String, String>,
    pub base_stopwords: Option<PathBuf>,
    pub extra_stopwords: Vec<PathBuf>,
    pub model: Option<PathBuf>,
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_count: u64,
    pub mode: TrainingMode,
    pub negatives: usize,
    pub threads: usize,
    pub full_softmax_cap: usize,
    pub full_model: bool,
    pub top_n: usize,
    pub top_percent: f64,
    pub cluster_threshold: f64,
    pub candidates_top_k: usize,
    pub anchors: BTreeMap<String, String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            corpus: None,
            format: None,
            query: None,
            query_file: None,
            industry_queries: BTreeMap::new(),
            base_stopwords: None,
            extra_stopwords: Vec::new(),
            model: None,
            dim: t.dim,
            window: t.window,
            epochs: t.epochs,
            learning_rate: t.learning_rate,
            min_count: t.min_count,
            mode: t.mode,
            negatives: t.negatives,
            threads: t.threads,
            full_softmax_cap: t.full_softmax_cap,
            full_model: false,
            top_n: DEFAULT_TOP_N,
            top_percent: DEFAULT_TOP_PERCENT,
            cluster_threshold: DEFAULT_CLUSTER_THRESHOLD,
            candidates_top_k: DEFAULT_CANDIDATES,
            anchors: BTreeMap::new(),
            out: None,
            seed: None,
        }
    }
}

/// Seed precedence: explicit value, then `TRENDLENS_SEED`, then the default.
pub fn resolve_seed(explicit: Option<u64>) -> Result<u64, PipelineError> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| PipelineError::new(Stage::Config, format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

impl PipelineConfig {
    pub fn from_json_str(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).stage(Stage::Config)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::new(Stage::Config, format!("{}: {e}", path.display())))?;
        let mut config = Self::from_json_str(&text)?;
        if let Some(base) = path.parent() {
            config.rebase_paths(base);
        }
        Ok(config)
    }

    fn rebase_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.corpus, &mut self.query_file, &mut self.base_stopwords, &mut self.model, &mut self.out]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        self.extra_stopwords.iter_mut().for_each(fix);
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            dim: self.dim,
            window: self.window,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            min_count: self.min_count,
            mode: self.mode,
            negatives: self.negatives,
            threads: self.threads,
            full_softmax_cap: self.full_softmax_cap,
            seed,
        }
    }

    /// Fills the seed and checks everything that can be checked before any
    /// work starts.
    pub fn resolve(mut self) -> Result<Self, PipelineError> {
        self.seed = Some(resolve_seed(self.seed)?);
        let err = |m: String| Err(PipelineError::new(Stage::Config, m));
        let Some(corpus) = &self.corpus else {
            return err("no corpus given".into());
        };
        if self.out.is_none() {
            return err("no output directory given".into());
        }
        let mut inputs: Vec<&PathBuf> = vec![corpus];
        inputs.extend(self.query_file.iter());
        inputs.extend(self.base_stopwords.iter());
        inputs.extend(self.extra_stopwords.iter());
        inputs.extend(self.model.iter());
        for p in inputs {
            if !p.is_file() {
                return err(format!("input file {} does not exist", p.display()));
            }
        }
        if self.query.is_some() && self.query_file.is_some() {
            return err("give either query or query_file, not both".into());
        }
        if self.top_n == 0 {
            return err("top_n must be at least 1".into());
        }
        if !(self.top_percent > 0.0 && self.top_percent <= 100.0) {
            return err(format!("top_percent must be in (0, 100], got {}", self.top_percent));
        }
        if !(self.cluster_threshold.is_finite() && self.cluster_threshold > 0.0) {
            return err(format!("cluster_threshold must be positive, got {}", self.cluster_threshold));
        }
        if self.candidates_top_k == 0 {
            return err("candidates_top_k must be at least 1".into());
        }
        self.train_config(self.seed.unwrap_or(DEFAULT_SEED))
            .validate()
            .stage(Stage::Config)?;
        Ok(self)
    }

    pub fn to_pretty_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

/// A global query plus optional per-industry queries. A document is kept if
/// it matches the global query (when given) and its own industry's query
/// (when one exists for its industry).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusQuery {
    pub global: Option<QueryExpr>,
    pub per_industry: BTreeMap<String, QueryExpr>,
}

impl CorpusQuery {
    pub fn build(
        query: Option<&str>,
        query_file: Option<&Path>,
        industry_queries: &BTreeMap<String, String>,
    ) -> Result<Self, PipelineError> {
        let source = match (query, query_file) {
            (Some(q), _) => Some(q.to_string()),
            (None, Some(p)) => Some(
                fs::read_to_string(p)
                    .map_err(|e| PipelineError::new(Stage::Query, format!("{}: {e}", p.display())))?,
            ),
            (None, None) => None,
        };
        let global = source.as_deref().map(parse_query).transpose().stage(Stage::Query)?;
        let per_industry = industry_queries
            .iter()
            .map(|(k, q)| {
                parse_query(q)
                    .map(|e| (k.clone(), e))
                    .map_err(|e| PipelineError::new(Stage::Query, format!("query for industry {k:?}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { global, per_industry })
    }

    pub fn is_empty(&self) -> bool {
        self.global.is_none() && self.per_industry.is_empty()
    }

    pub fn matches(&self, doc: &PatentDocument) -> bool {
        let tokens = doc.search_tokens();
        self.global.as_ref().is_none_or(|q| q.matches_tokens(&tokens))
            && self
                .per_industry
                .get(&doc.industry)
                .is_none_or(|q| q.matches_tokens(&tokens))
    }

    pub fn apply(&self, corpus: &Corpus) -> Corpus {
        if self.is_empty() {
            return corpus.clone();
        }
        corpus.filter_by(|d| self.matches(d))
    }
}

/// Loads the base list (bundled English list when `base` is `None`) and the
/// curated extras.
pub fn load_stopword_lists(
    base: Option<&Path>,
    extras: &[PathBuf],
) -> Result<(StopwordList, Vec<StopwordList>), PipelineError> {
    let base = match base {
        Some(p) => StopwordList::load(p, StopwordTier::Base).stage(Stage::Stopwords)?,
        None => StopwordList::bundled_english(),
    };
    let extras = extras
        .iter()
        .map(|p| StopwordList::load(p, StopwordTier::Curated))
        .collect::<Result<Vec<_>, _>>()
        .stage(Stage::Stopwords)?;
    Ok((base, extras))
}

/// Tokenizes every abstract and removes stopwords.
pub fn prepare_tokens(corpus: &Corpus, lists: &[&StopwordList]) -> Vec<TokenStream> {
    corpus
        .documents()
        .iter()
        .map(|d| filter_stopwords(&TokenStream::from_text(d.id.clone(), &d.abstract_text), lists))
        .collect()
}

pub fn extract_all<E: Embedder + ?Sized>(
    streams: &[TokenStream],
    embedder: &E,
    lists: &[&StopwordList],
    top_n: usize,
) -> Result<Vec<ExtractionResult>, PipelineError> {
    streams
        .iter()
        .map(|s| extract_keywords(s, embedder, lists, top_n))
        .collect::<Result<_, _>>()
        .stage(Stage::Extract)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub top_percent: f64,
    pub cluster_threshold: f64,
    /// industry → anchor token; industries without an entry use their
    /// lowercased label when it is a single in-vocabulary token.
    pub anchors: BTreeMap<String, String>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            top_percent: DEFAULT_TOP_PERCENT,
            cluster_threshold: DEFAULT_CLUSTER_THRESHOLD,
            anchors: BTreeMap::new(),
        }
    }
}

/// Results for one industry.
#[derive(Debug, Clone, PartialEq)]
pub struct IndustryTrend {
    pub industry: String,
    pub total_docs: usize,
    /// Every extracted keyword, ranked (count desc, keyword asc).
    pub frequencies: Vec<(String, usize)>,
    pub top_keywords: Vec<(String, usize)>,
    pub points: Vec<ProjectedPoint>,
    pub clusters: ClusterAssignment,
    pub distances: Vec<DistanceRow>,
    pub anchor: Option<String>,
    pub anchor_similarity: Vec<AnchorRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub vocab_size: usize,
    pub dim: usize,
    pub seed: u64,
    pub mode: TrainingMode,
    pub corpus_documents: usize,
    pub corpus_tokens: u64,
}

impl ModelSummary {
    pub fn of(model: &EmbeddingModel) -> Self {
        Self {
            vocab_size: model.vocab.len(),
            dim: model.dim(),
            seed: model.seed(),
            mode: model.config.mode,
            corpus_documents: model.corpus_documents,
            corpus_tokens: model.corpus_tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendReport {
    pub corpus_documents: usize,
    pub model: ModelSummary,
    pub pca: PcaBasis,
    pub industries: Vec<IndustryTrend>,
}

impl TrendReport {
    /// Checks that every clustered keyword is projected and selected.
    pub fn is_consistent(&self) -> bool {
        self.industries.iter().all(|t| {
            let top: BTreeSet<&str> = t.top_keywords.iter().map(|(k, _)| k.as_str()).collect();
            let projected: BTreeSet<&str> = t.points.iter().map(|p| p.keyword.as_str()).collect();
            t.clusters
                .clusters
                .iter()
                .flat_map(|(_, m)| m)
                .all(|k| projected.contains(k.as_str()) && top.contains(k.as_str()))
                && projected.iter().all(|k| top.contains(k))
        })
    }
}

fn default_anchor(industry: &str, model: &EmbeddingModel) -> Option<String> {
    match tokenize(industry).as_slice() {
        [single] if model.vector(single).is_some() => Some(single.clone()),
        _ => None,
    }
}

type Ranked = Vec<(String, usize)>;

/// Aggregates keywords per industry, selects the top percent, fits one PCA
/// basis over the union of selected keyword vectors and clusters each
/// industry's projected keywords.
pub fn analyze(
    corpus: &Corpus,
    results: &[ExtractionResult],
    model: &EmbeddingModel,
    options: &AnalysisOptions,
) -> Result<TrendReport, PipelineError> {
    let tables = aggregate_keywords(results, corpus).stage(Stage::Aggregate)?;

    // (industry, total_docs, ranked frequencies, top-percent selection)
    let mut selected: Vec<(String, usize, Ranked, Ranked)> = Vec::new();
    for (industry, table) in &tables {
        if table.is_empty() {
            log::warn!("industry {industry:?}: no extracted keywords, skipping");
            continue;
        }
        let top = select_top_percent(table, options.top_percent).stage(Stage::Select)?;
        selected.push((industry.clone(), table.total_docs, table.ranked(), top));
    }

    let mut union: BTreeSet<&str> = BTreeSet::new();
    for (industry, _, _, top) in &selected {
        for (k, _) in top {
            if model.vector(k).is_some() {
                union.insert(k);
            } else {
                log::warn!("industry {industry:?}: keyword {k:?} has no model vector");
            }
        }
    }
    let vectors: Vec<Vec<f64>> = union.iter().map(|k| model.vector(k).expect("filtered").to_vec()).collect();
    let basis = fit_pca(&vectors).stage(Stage::Pca)?;

    let mut industries = Vec::new();
    for (industry, total_docs, frequencies, top) in selected {
        let points: Vec<ProjectedPoint> = top
            .iter()
            .filter_map(|(k, _)| model.vector(k).map(|v| ProjectedPoint::new(&basis, k.clone(), v.to_vec())))
            .collect();
        let clusters = cluster_points(&points, options.cluster_threshold);

        let planar = pairwise_distances(&points);
        let mut distances = Vec::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                distances.push(DistanceRow {
                    industry: industry.clone(),
                    keyword_a: points[i].keyword.clone(),
                    keyword_b: points[j].keyword.clone(),
                    cosine: cosine_similarity(&points[i].full_vector, &points[j].full_vector).stage(Stage::Pca)?,
                    distance_2d: planar[i][j],
                });
            }
        }

        let anchor = options
            .anchors
            .get(&industry)
            .cloned()
            .filter(|a| model.vector(a).is_some())
            .or_else(|| default_anchor(&industry, model));
        let mut anchor_similarity = Vec::new();
        if let Some(a) = &anchor {
            let av = model.vector(a).expect("anchor is in vocabulary");
            for p in &points {
                anchor_similarity.push(AnchorRow {
                    industry: industry.clone(),
                    anchor: a.clone(),
                    keyword: p.keyword.clone(),
                    cosine: cosine_similarity(av, &p.full_vector).stage(Stage::Pca)?,
                });
            }
        } else {
            log::info!("industry {industry:?}: no anchor token in vocabulary");
        }

        industries.push(IndustryTrend {
            industry,
            total_docs,
            frequencies,
            top_keywords: top,
            points,
            clusters,
            distances,
            anchor,
            anchor_similarity,
        });
    }

    Ok(TrendReport {
        corpus_documents: corpus.len(),
        model: ModelSummary::of(model),
        pca: basis,
        industries,
    })
}

#[derive(Serialize)]
struct ReportJson<'a> {
    corpus_documents: usize,
    model: &'a ModelSummary,
    pca_explained_variance: [f64; 2],
    industries: Vec<IndustryJson<'a>>,
}

#[derive(Serialize)]
struct IndustryJson<'a> {
    industry: &'a str,
    total_docs: usize,
    distinct_keywords: usize,
    top_keywords: &'a [(String, usize)],
    cluster_threshold: f64,
    clusters: &'a [(usize, Vec<String>)],
    anchor: &'a Option<String>,
}

fn create_file(dir: &Path, name: &str) -> Result<fs::File, PipelineError> {
    let path = dir.join(name);
    fs::File::create(&path).map_err(|e| PipelineError::new(Stage::Emit, format!("{}: {e}", path.display())))
}

/// Writes the analysis CSVs and `report.json`; returns the projection rows
/// as stored (6-decimal).
pub fn write_analysis(report: &TrendReport, dir: &Path) -> Result<Vec<ProjectionRow>, PipelineError> {
    fs::create_dir_all(dir).stage(Stage::Emit)?;
    let freq: BTreeMap<String, Vec<(String, usize)>> =
        report.industries.iter().map(|t| (t.industry.clone(), t.frequencies.clone())).collect();
    write_frequency_csv(create_file(dir, FREQUENCIES_FILE)?, &freq).stage(Stage::Emit)?;
    let top: BTreeMap<String, Vec<(String, usize)>> =
        report.industries.iter().map(|t| (t.industry.clone(), t.top_keywords.clone())).collect();
    write_frequency_csv(create_file(dir, TOP_KEYWORDS_FILE)?, &top).stage(Stage::Emit)?;

    let rows: Vec<ProjectionRow> = report
        .industries
        .iter()
        .flat_map(|t| ProjectionRow::from_points(&t.industry, &t.points, &t.clusters))
        .collect();
    write_projection_csv(create_file(dir, PROJECTION_FILE)?, &rows).stage(Stage::Emit)?;
    let distances: Vec<DistanceRow> = report.industries.iter().flat_map(|t| t.distances.clone()).collect();
    write_distances_csv(create_file(dir, DISTANCES_FILE)?, &distances).stage(Stage::Emit)?;
    let anchors: Vec<AnchorRow> = report.industries.iter().flat_map(|t| t.anchor_similarity.clone()).collect();
    write_anchor_csv(create_file(dir, ANCHOR_FILE)?, &anchors).stage(Stage::Emit)?;

    let json = ReportJson {
        corpus_documents: report.corpus_documents,
        model: &report.model,
        pca_explained_variance: report.pca.explained_variance,
        industries: report
            .industries
            .iter()
            .map(|t| IndustryJson {
                industry: &t.industry,
                total_docs: t.total_docs,
                distinct_keywords: t.frequencies.len(),
                top_keywords: &t.top_keywords,
                cluster_threshold: t.clusters.threshold,
                clusters: &t.clusters.clusters,
                anchor: &t.anchor,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&json).stage(Stage::Emit)?;
    text.push('\n');
    fs::write(dir.join(REPORT_FILE), text).stage(Stage::Emit)?;
    Ok(rows)
}

/// `scatter_<industry>.svg` with the label reduced to lowercase
/// letter/digit runs joined by `_`.
pub fn svg_file_name(industry: &str) -> String {
    let slug = tokenize(industry).join("_");
    format!("scatter_{}.svg", if slug.is_empty() { "industry" } else { &slug })
}

/// Renders one SVG per industry from stored projection rows.
pub fn plot_projection(rows: &[ProjectionRow], dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(dir).stage(Stage::Emit)?;
    let mut written = Vec::new();
    for (industry, (points, clusters)) in projection_by_industry(rows) {
        let path = dir.join(svg_file_name(&industry));
        emit_scatter_svg(&points, &clusters, &path, Some(&industry)).stage(Stage::Emit)?;
        written.push(path);
    }
    Ok(written)
}

pub fn load_corpus_auto(path: &Path, format: Option<CorpusFormat>) -> Result<Corpus, PipelineError> {
    load_corpus(path, format.unwrap_or_else(|| CorpusFormat::from_path(path))).stage(Stage::Load)
}

/// Reads a canonical JSONL corpus (as written by the pipeline).
pub fn read_corpus_jsonl(path: &Path) -> Result<Corpus, PipelineError> {
    let f = fs::File::open(path).map_err(|e| PipelineError::new(Stage::Load, format!("{}: {e}", path.display())))?;
    read_jsonl(BufReader::new(f)).stage(Stage::Load)
}

#[derive(Debug)]
pub enum PipelineOutcome {
    Completed(Box<TrendReport>),
    /// No curated stopword list was supplied; candidates were written and a
    /// human must curate them before the run can continue.
    CurationRequired { candidates: PathBuf, count: usize },
}

fn obtain_model(config: &PipelineConfig, streams: &[TokenStream], seed: u64) -> Result<EmbeddingModel, PipelineError> {
    match &config.model {
        Some(path) => {
            log::info!("loading model {}", path.display());
            load_model(path).stage(Stage::Train)
        }
        None => {
            let tc = config.train_config(seed);
            log::info!(
                "training {} model: D={} window={} epochs={} on {} documents",
                tc.mode,
                tc.dim,
                tc.window,
                tc.epochs,
                streams.len()
            );
            train(streams, &tc).stage(Stage::Train)
        }
    }
}

/// Runs the whole pipeline, writing every artifact into `config.out`.
pub fn run_pipeline(config: PipelineConfig) -> Result<PipelineOutcome, PipelineError> {
    let config = config.resolve()?;
    let seed = config.seed.expect("resolved");
    let out = config.out.clone().expect("resolved");
    fs::create_dir_all(&out)
        .map_err(|e| PipelineError::new(Stage::Emit, format!("{}: {e}", out.display())))?;
    fs::write(out.join(CONFIG_RESOLVED), config.to_pretty_json()).stage(Stage::Emit)?;

    let corpus_path = config.corpus.as_deref().expect("resolved");
    let corpus = load_corpus_auto(corpus_path, config.format)?;
    log::info!("loaded {} documents from {}", corpus.len(), corpus_path.display());
    let query = CorpusQuery::build(config.query.as_deref(), config.query_file.as_deref(), &config.industry_queries)?;
    let corpus = query.apply(&corpus);
    if corpus.is_empty() {
        return Err(PipelineError::new(Stage::Query, "query matched no documents"));
    }
    log::info!("{} documents after filtering", corpus.len());
    corpus.save_jsonl(out.join(CORPUS_FILE)).stage(Stage::Emit)?;

    let (base, extras) = load_stopword_lists(config.base_stopwords.as_deref(), &config.extra_stopwords)?;

    if extras.is_empty() {
        let streams = prepare_tokens(&corpus, &[&base]);
        let model = obtain_model(&config, &streams, seed)?;
        let candidates = generate_stopword_candidates(
            &corpus,
            &ReferenceEmbedder::new(&model),
            &base,
            config.candidates_top_k,
            config.top_n,
        )
        .stage(Stage::Stopwords)?;
        let path = out.join(CANDIDATES_FILE);
        write_candidates_csv(create_file(&out, CANDIDATES_FILE)?, &candidates).stage(Stage::Emit)?;
        log::warn!(
            "no curated stopword list supplied; wrote {} candidates to {}",
            candidates.len(),
            path.display()
        );
        return Ok(PipelineOutcome::CurationRequired {
            candidates: path,
            count: candidates.len(),
        });
    }

    let mut lists: Vec<&StopwordList> = vec![&base];
    lists.extend(extras.iter());
    let streams = prepare_tokens(&corpus, &lists);
    write_tokens_jsonl(create_file(&out, TOKENS_FILE)?, &streams).stage(Stage::Emit)?;

    let model = obtain_model(&config, &streams, seed)?;
    save_model(&model, out.join(MODEL_FILE), config.full_model).stage(Stage::Emit)?;

    let results = extract_all(&streams, &ReferenceEmbedder::new(&model), &lists, config.top_n)?;
    write_keywords_csv(create_file(&out, KEYWORDS_FILE)?, &results).stage(Stage::Emit)?;

    let options = AnalysisOptions {
        top_percent: config.top_percent,
        cluster_threshold: config.cluster_threshold,
        anchors: config.anchors.clone(),
    };
    let report = analyze(&corpus, &results, &model, &options)?;
    let rows = write_analysis(&report, &out)?;
    plot_projection(&rows, &out)?;
    log::info!("wrote report to {}", out.display());
    Ok(PipelineOutcome::Completed(Box::new(report)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_flat_json() {
        let c = PipelineConfig::from_json_str(r#"{"dim": 32, "top_percent": 10.0, "seed": 9}"#).unwrap();
        assert_eq!(c.dim, 32);
        assert_eq!(c.window, 5);
        assert_eq!(c.top_n, 5);
        assert_eq!(c.seed, Some(9));
        assert!(PipelineConfig::from_json_str(r#"{"train": {"dim": 3}}"#).is_err());
    }

    #[test]
    fn explicit_seed_wins() {
        assert_eq!(resolve_seed(Some(7)).unwrap(), 7);
    }

    #[test]
    fn resolve_rejects_missing_inputs() {
        let c = PipelineConfig {
            corpus: Some("/nonexistent/corpus.jsonl".into()),
            out: Some("/tmp/x".into()),
            seed: Some(1),
            ..PipelineConfig::default()
        };
        let err = c.resolve().unwrap_err();
        assert_eq!(err.stage, Stage::Config);
    }

    #[test]
    fn svg_names() {
        assert_eq!(svg_file_name("Medical"), "scatter_medical.svg");
        assert_eq!(svg_file_name("Supply Chain/AI"), "scatter_supply_chain_ai.svg");
        assert_eq!(svg_file_name("--"), "scatter_industry.svg");
    }

    #[test]
    fn industry_queries_filter_only_their_industry() {
        let docs = vec![
            PatentDocument {
                id: "1".into(),
                industry: "medical".into(),
                year: 2020,
                title: String::new(),
                abstract_text: "deep learning for healthcare".into(),
            },
            PatentDocument {
                id: "2".into(),
                industry: "medical".into(),
                year: 2020,
                title: String::new(),
                abstract_text: "deep learning for farming".into(),
            },
            PatentDocument {
                id: "3".into(),
                industry: "transport".into(),
                year: 2020,
                title: String::new(),
                abstract_text: "deep learning for routing".into(),
            },
        ];
        let corpus = Corpus::new(docs).unwrap();
        let mut per = BTreeMap::new();
        per.insert("medical".to_string(), "'healthcare' OR 'medical'".to_string());
        let q = CorpusQuery::build(Some("Deep Learn*"), None, &per).unwrap();
        let ids: Vec<_> = q.apply(&corpus).documents().iter().map(|d| d.id.clone()).collect();
        assert_eq!(ids, ["1", "3"]);
    }
}
