//! Embedding-based keyword extraction.
//!
//! A document is embedded, every distinct candidate word is embedded, each
//! candidate is scored by cosine similarity to the document vector, and the
//! `top_n` best are kept. The embedder is pluggable: [`ReferenceEmbedder`]
//! uses a trained skip-gram model (document = mean of word vectors);
//! [`FileEmbedder`] serves vectors produced by an external model.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::embedding::{
    cosine_similarity, load_model, norm, parse_row, push_row, EmbeddingError, EmbeddingModel,
};
use crate::text::{filter_stopwords, StopwordList, TokenStream};

pub const DOCVEC_MAGIC: &str = "trendlens-docvec";
pub const DEFAULT_TOP_N: usize = 5;

#[derive(Debug, Error)]
pub enum KeywordError {
    #[error("document {0:?} has no in-vocabulary tokens")]
    NoKnownTokens(String),
    #[error("no document vector for {0:?}")]
    UnknownDocument(String),
    #[error("top_n must be at least 1")]
    InvalidTopN,
    #[error("embedding dimension mismatch: document vectors have D = {docs}, word vectors have D = {words}")]
    DimensionMismatch { docs: usize, words: usize },
    #[error("document vector file header mismatch: {0}")]
    Header(String),
    #[error("duplicate document id {0:?} in document vector file")]
    DuplicateDocument(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("keyword CSV: {0}")]
    Csv(String),
}

/// Produces document and word vectors of a common dimension.
pub trait Embedder {
    fn dim(&self) -> usize;

    /// Embeds a (stopword-filtered) document.
    fn embed_document(&self, doc: &TokenStream) -> Result<Vec<f64>, KeywordError>;

    /// Embeds one word; `None` for unknown words. Never returns a zero vector.
    fn embed_word(&self, token: &str) -> Option<Vec<f64>>;
}

/// Skip-gram backed embedder: a word is its model vector, a document is the
/// mean of its in-vocabulary token vectors.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceEmbedder<'a> {
    model: &'a EmbeddingModel,
}

impl<'a> ReferenceEmbedder<'a> {
    pub fn new(model: &'a EmbeddingModel) -> Self {
        Self { model }
    }
}

pub fn reference_embedder(model: &EmbeddingModel) -> ReferenceEmbedder<'_> {
    ReferenceEmbedder::new(model)
}

impl Embedder for ReferenceEmbedder<'_> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn embed_document(&self, doc: &TokenStream) -> Result<Vec<f64>, KeywordError> {
        // Accumulate per distinct token in sorted order so the mean does not
        // depend on token order.
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        let mut total = 0usize;
        for t in &doc.tokens {
            if self.model.vector(t).is_some() {
                *counts.entry(t.as_str()).or_default() += 1;
                total += 1;
            }
        }
        if total == 0 {
            return Err(KeywordError::NoKnownTokens(doc.doc_id.clone()));
        }
        let mut mean = vec![0.0; self.dim()];
        for (word, count) in counts {
            let weight = count as f64 / total as f64;
            let v = self.model.vector(word).expect("checked above");
            for (m, x) in mean.iter_mut().zip(v) {
                *m += weight * x;
            }
        }
        Ok(mean)
    }

    fn embed_word(&self, token: &str) -> Option<Vec<f64>> {
        self.model
            .vector(token)
            .filter(|v| norm(v) > 0.0)
            .map(<[f64]>::to_vec)
    }
}

/// Lookup-backed embedder over externally produced vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FileEmbedder {
    dim: usize,
    documents: HashMap<String, Vec<f64>>,
    words: HashMap<String, Vec<f64>>,
}

impl FileEmbedder {
    pub fn new(
        dim: usize,
        documents: HashMap<String, Vec<f64>>,
        words: HashMap<String, Vec<f64>>,
    ) -> Self {
        Self {
            dim,
            documents,
            words,
        }
    }

    /// Loads a document-vector file and a word-vector file in the model
    /// format. Both must declare the same dimension.
    pub fn load(doc_vectors: impl AsRef<Path>, word_vectors: impl AsRef<Path>) -> Result<Self, KeywordError> {
        let (doc_dim, documents) = load_doc_vectors(doc_vectors)?;
        let model = load_model(word_vectors)?;
        if model.dim() != doc_dim {
            return Err(KeywordError::DimensionMismatch {
                docs: doc_dim,
                words: model.dim(),
            });
        }
        let words = model
            .vocab
            .words()
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), model.input.row(i).to_vec()))
            .collect();
        Ok(Self::new(doc_dim, documents, words))
    }
}

pub fn file_embedder(
    doc_vectors: impl AsRef<Path>,
    word_vectors: impl AsRef<Path>,
) -> Result<FileEmbedder, KeywordError> {
    FileEmbedder::load(doc_vectors, word_vectors)
}

impl Embedder for FileEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_document(&self, doc: &TokenStream) -> Result<Vec<f64>, KeywordError> {
        self.documents
            .get(&doc.doc_id)
            .cloned()
            .ok_or_else(|| KeywordError::UnknownDocument(doc.doc_id.clone()))
    }

    fn embed_word(&self, token: &str) -> Option<Vec<f64>> {
        self.words.get(token).filter(|v| norm(v) > 0.0).cloned()
    }
}

/// Serializes document vectors: header `trendlens-docvec 1 <N> <D>` then one
/// `doc_id v1 .. vD` line per document, in the given order.
pub fn doc_vectors_to_string(dim: usize, vectors: &[(String, Vec<f64>)]) -> String {
    let mut out = String::new();
    writeln!(out, "{DOCVEC_MAGIC} 1 {} {dim}", vectors.len()).expect("write to string");
    for (id, v) in vectors {
        assert_eq!(v.len(), dim, "document vector has wrong dimension");
        push_row(&mut out, id, v);
    }
    out
}

pub fn save_doc_vectors(
    path: impl AsRef<Path>,
    dim: usize,
    vectors: &[(String, Vec<f64>)],
) -> Result<(), KeywordError> {
    let path = path.as_ref();
    fs::write(path, doc_vectors_to_string(dim, vectors)).map_err(|source| KeywordError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_doc_vectors(text: &str) -> Result<(usize, HashMap<String, Vec<f64>>), KeywordError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header = lines.next().map(|(_, l)| l).unwrap_or("");
    let bad = || KeywordError::Header(format!("expected `{DOCVEC_MAGIC} 1 <N> <D>`, found {header:?}"));
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != DOCVEC_MAGIC || fields[1] != "1" {
        return Err(bad());
    }
    let n: usize = fields[2].parse().map_err(|_| bad())?;
    let dim: usize = fields[3].parse().map_err(|_| bad())?;
    if dim == 0 {
        return Err(bad());
    }
    let mut documents = HashMap::with_capacity(n);
    for (line_no, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let (id, v) = parse_row(line, dim, line_no)?;
        if documents.insert(id.clone(), v).is_some() {
            return Err(KeywordError::DuplicateDocument(id));
        }
    }
    if documents.len() != n {
        return Err(KeywordError::Header(format!(
            "header declares {n} documents, file has {}",
            documents.len()
        )));
    }
    Ok((dim, documents))
}

pub fn load_doc_vectors(path: impl AsRef<Path>) -> Result<(usize, HashMap<String, Vec<f64>>), KeywordError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| KeywordError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_doc_vectors(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeywordScore {
    pub keyword: String,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionStatus {
    Ok,
    /// Nothing could be scored: every token was a stopword or unknown to the
    /// embedder, or the document had no vector.
    NoCandidates,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionResult {
    pub doc_id: String,
    pub keywords: Vec<KeywordScore>,
    pub status: ExtractionStatus,
}

impl ExtractionResult {
    fn empty(doc_id: &str) -> Self {
        Self {
            doc_id: doc_id.to_string(),
            keywords: Vec::new(),
            status: ExtractionStatus::NoCandidates,
        }
    }
}

/// Ranks the distinct non-stopword tokens of `doc` by cosine similarity to
/// the document embedding and keeps the best `top_n`. Ties break by
/// ascending keyword.
pub fn extract_keywords<E: Embedder + ?Sized>(
    doc: &TokenStream,
    embedder: &E,
    stopwords: &[&StopwordList],
    top_n: usize,
) -> Result<ExtractionResult, KeywordError> {
    if top_n == 0 {
        return Err(KeywordError::InvalidTopN);
    }
    let filtered = filter_stopwords(doc, stopwords);
    if filtered.is_empty() {
        log::warn!("document {:?}: no tokens left after stopword filtering", doc.doc_id);
        return Ok(ExtractionResult::empty(&doc.doc_id));
    }
    let doc_vector = match embedder.embed_document(&filtered) {
        Ok(v) => v,
        Err(e @ (KeywordError::NoKnownTokens(_) | KeywordError::UnknownDocument(_))) => {
            log::warn!("document {:?}: {e}", doc.doc_id);
            return Ok(ExtractionResult::empty(&doc.doc_id));
        }
        Err(e) => return Err(e),
    };
    if norm(&doc_vector) == 0.0 {
        log::warn!("document {:?}: zero document vector", doc.doc_id);
        return Ok(ExtractionResult::empty(&doc.doc_id));
    }

    let candidates: BTreeSet<&str> = filtered.tokens.iter().map(String::as_str).collect();
    let mut scored = Vec::with_capacity(candidates.len());
    for token in candidates {
        if let Some(v) = embedder.embed_word(token) {
            let score = cosine_similarity(&v, &doc_vector)?;
            scored.push(KeywordScore {
                keyword: token.to_string(),
                score,
            });
        }
    }
    if scored.is_empty() {
        log::warn!("document {:?}: no candidate known to the embedder", doc.doc_id);
        return Ok(ExtractionResult::empty(&doc.doc_id));
    }
    scored.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.keyword.cmp(&b.keyword)));
    scored.truncate(top_n);
    Ok(ExtractionResult {
        doc_id: doc.doc_id.clone(),
        keywords: scored,
        status: ExtractionStatus::Ok,
    })
}

/// Writes `doc_id,rank,keyword,score` rows (rank 1-based, score to 6
/// decimals).
pub fn write_keywords_csv<W: Write>(out: W, results: &[ExtractionResult]) -> Result<(), KeywordError> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| KeywordError::Csv(e.to_string());
    w.write_record(["doc_id", "rank", "keyword", "score"]).map_err(csv_err)?;
    for r in results {
        for (i, k) in r.keywords.iter().enumerate() {
            w.write_record([
                r.doc_id.as_str(),
                &(i + 1).to_string(),
                k.keyword.as_str(),
                &format!("{:.6}", k.score),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| KeywordError::Csv(e.to_string()))
}

/// Reads a keyword CSV back into per-document results, grouped in first-seen
/// document order. Scores carry the 6-decimal precision of the file.
pub fn read_keywords_csv<R: std::io::Read>(input: R) -> Result<Vec<ExtractionResult>, KeywordError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(|e| KeywordError::Csv(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["doc_id", "rank", "keyword", "score"] {
        return Err(KeywordError::Csv(format!(
            "expected header doc_id,rank,keyword,score, found {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut results: Vec<ExtractionResult> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| KeywordError::Csv(format!("line {line}: {e}")))?;
        let doc_id = rec[0].to_string();
        let score: f64 = rec[3]
            .parse()
            .map_err(|_| KeywordError::Csv(format!("line {line}: invalid score {:?}", &rec[3])))?;
        let slot = *index.entry(doc_id.clone()).or_insert_with(|| {
            results.push(ExtractionResult {
                doc_id,
                keywords: Vec::new(),
                status: ExtractionStatus::Ok,
            });
            results.len() - 1
        });
        results[slot].keywords.push(KeywordScore {
            keyword: rec[2].to_string(),
            score,
        });
    }
    Ok(results)
}
