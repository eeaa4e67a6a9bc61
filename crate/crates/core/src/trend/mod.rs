//! Per-industry keyword aggregation, stopword induction, 2-D projection
//! and clustering.

mod cluster;
mod pca;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::corpus::Corpus;
use crate::keywords::{extract_keywords, Embedder, ExtractionResult, KeywordError};
use crate::text::{StopwordList, TokenStream};

pub use cluster::{cluster_points, pairwise_distances, ClusterAssignment};
pub use pca::{fit_pca, project, PcaBasis, POWER_ITERATION_MAX, POWER_ITERATION_TOL};

pub const DEFAULT_TOP_PERCENT: f64 = 5.0;
pub const DEFAULT_CANDIDATES: usize = 30;

#[derive(Debug, Error)]
pub enum TrendError {
    #[error("extraction result refers to unknown document {0:?}")]
    UnknownDocument(String),
    #[error("document {0:?} has more than one extraction result")]
    DuplicateResult(String),
    #[error("percent must be in (0, 100], got {0}")]
    InvalidPercent(f64),
    #[error("keyword frequency table for {0:?} is empty")]
    EmptyTable(String),
    #[error("PCA needs at least 3 vectors, got {0}")]
    TooFewVectors(usize),
    #[error("PCA needs dimension >= 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("vectors have inconsistent dimensions")]
    RaggedVectors,
    #[error("all points are identical; covariance is zero")]
    ZeroVariance,
    #[error(transparent)]
    Keyword(#[from] KeywordError),
}

/// Document frequency of extracted keywords within one industry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordFrequencyTable {
    pub industry: String,
    pub counts: BTreeMap<String, usize>,
    pub total_docs: usize,
}

impl KeywordFrequencyTable {
    pub fn new(industry: impl Into<String>, total_docs: usize) -> Self {
        Self {
            industry: industry.into(),
            counts: BTreeMap::new(),
            total_docs,
        }
    }

    /// All keywords ordered by (count desc, keyword asc).
    pub fn ranked(&self) -> Vec<(String, usize)> {
        rank_counts(&self.counts)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

fn rank_counts(counts: &BTreeMap<String, usize>) -> Vec<(String, usize)> {
    let mut ranked: Vec<(String, usize)> = counts.iter().map(|(k, &c)| (k.clone(), c)).collect();
    // BTreeMap iteration is already keyword-ascending; a stable sort on count
    // keeps that as the tie-break.
    ranked.sort_by_key(|r| std::cmp::Reverse(r.1));
    ranked
}

/// Counts, per industry, the documents whose extraction contains each
/// keyword. Every industry of the corpus gets a table, possibly empty.
pub fn aggregate_keywords(
    results: &[ExtractionResult],
    corpus: &Corpus,
) -> Result<BTreeMap<String, KeywordFrequencyTable>, TrendError> {
    let industry_of: HashMap<&str, &str> = corpus
        .documents()
        .iter()
        .map(|d| (d.id.as_str(), d.industry.as_str()))
        .collect();
    let mut tables: BTreeMap<String, KeywordFrequencyTable> = BTreeMap::new();
    for doc in corpus.documents() {
        tables
            .entry(doc.industry.clone())
            .or_insert_with(|| KeywordFrequencyTable::new(doc.industry.clone(), 0))
            .total_docs += 1;
    }
    let mut seen = BTreeSet::new();
    for result in results {
        let industry = industry_of
            .get(result.doc_id.as_str())
            .ok_or_else(|| TrendError::UnknownDocument(result.doc_id.clone()))?;
        if !seen.insert(result.doc_id.as_str()) {
            return Err(TrendError::DuplicateResult(result.doc_id.clone()));
        }
        let table = tables.get_mut(*industry).expect("industry table exists");
        let unique: BTreeSet<&str> = result.keywords.iter().map(|k| k.keyword.as_str()).collect();
        for k in unique {
            *table.counts.entry(k.to_string()).or_default() += 1;
        }
    }
    Ok(tables)
}

/// Number of keywords kept by [`select_top_percent`]:
/// `max(1, ceil(percent / 100 * distinct))`.
pub fn top_percent_size(distinct: usize, percent: f64) -> usize {
    let m = (percent / 100.0 * distinct as f64).ceil() as usize;
    m.clamp(1, distinct.max(1))
}

/// The most frequent `percent`% of keywords, ordered (count desc, keyword asc).
pub fn select_top_percent(
    table: &KeywordFrequencyTable,
    percent: f64,
) -> Result<Vec<(String, usize)>, TrendError> {
    if !(percent > 0.0 && percent <= 100.0) {
        return Err(TrendError::InvalidPercent(percent));
    }
    if table.is_empty() {
        return Err(TrendError::EmptyTable(table.industry.clone()));
    }
    let mut ranked = table.ranked();
    ranked.truncate(top_percent_size(table.counts.len(), percent));
    Ok(ranked)
}

/// Extracts keywords from every document using only `base` stopwords and
/// returns the `top_k` keywords by corpus-wide document frequency. The
/// output is meant for human curation; nothing is promoted automatically.
pub fn generate_stopword_candidates<E: Embedder + ?Sized>(
    corpus: &Corpus,
    embedder: &E,
    base: &StopwordList,
    top_k: usize,
    top_n: usize,
) -> Result<Vec<(String, usize)>, TrendError> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for doc in corpus.documents() {
        let stream = TokenStream::from_text(doc.id.clone(), &doc.abstract_text);
        let result = extract_keywords(&stream, embedder, &[base], top_n)?;
        for k in result.keywords {
            *counts.entry(k.keyword).or_default() += 1;
        }
    }
    let mut ranked = rank_counts(&counts);
    ranked.truncate(top_k);
    Ok(ranked)
}

/// A keyword with its full-space vector and 2-D PCA image.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPoint {
    pub keyword: String,
    pub full_vector: Vec<f64>,
    pub xy: (f64, f64),
}

impl ProjectedPoint {
    pub fn new(basis: &PcaBasis, keyword: impl Into<String>, full_vector: Vec<f64>) -> Self {
        let xy = project(basis, &full_vector);
        Self {
            keyword: keyword.into(),
            full_vector,
            xy,
        }
    }
}
