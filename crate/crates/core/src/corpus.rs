//! Patent corpus loading (JSONL / CSV) and query-based filtering.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::query::QueryExpr;
use crate::text::tokenize;

pub const MIN_YEAR: i32 = 1900;
pub const MAX_YEAR: i32 = 2100;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate document id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("corpus file {0} contains no records")]
    Empty(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatentDocument {
    pub id: String,
    pub industry: String,
    pub year: i32,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
}

impl PatentDocument {
    fn validate(&self) -> Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("field \"id\" must be non-empty".into());
        }
        if !(MIN_YEAR..=MAX_YEAR).contains(&self.year) {
            return Err(format!(
                "field \"year\" = {} outside [{MIN_YEAR}, {MAX_YEAR}]",
                self.year
            ));
        }
        if self.abstract_text.trim().is_empty() {
            return Err("field \"abstract\" must be non-empty".into());
        }
        Ok(())
    }

    /// Lowercased tokens of `title + " " + abstract`, the text a query is
    /// matched against.
    pub fn search_tokens(&self) -> Vec<String> {
        tokenize(&format!("{} {}", self.title, self.abstract_text))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guesses the format from a file extension; defaults to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Jsonl => "jsonl",
            CorpusFormat::Csv => "csv",
        })
    }
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(format!("unknown corpus format {other:?} (expected jsonl or csv)")),
        }
    }
}

/// An ordered collection of patents. Document order is load order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    documents: Vec<PatentDocument>,
    industries: BTreeSet<String>,
}

impl Corpus {
    /// Builds a corpus, rejecting invalid records and duplicate ids.
    /// Errors report the 1-based record position as the line.
    pub fn new(documents: Vec<PatentDocument>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for (i, doc) in documents.iter().enumerate() {
            doc.validate()
                .map_err(|message| CorpusError::Malformed { line: i + 1, message })?;
            if !seen.insert(doc.id.as_str()) {
                return Err(CorpusError::DuplicateId {
                    line: i + 1,
                    id: doc.id.clone(),
                });
            }
        }
        Ok(Self::from_validated(documents))
    }

    fn from_validated(documents: Vec<PatentDocument>) -> Self {
        let industries = documents.iter().map(|d| d.industry.clone()).collect();
        Self {
            documents,
            industries,
        }
    }

    pub fn documents(&self) -> &[PatentDocument] {
        &self.documents
    }

    pub fn industries(&self) -> &BTreeSet<String> {
        &self.industries
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&PatentDocument> {
        self.documents.iter().find(|d| d.id == id)
    }

    /// Keeps the documents matching `expr`, preserving order.
    pub fn filter(&self, expr: &QueryExpr) -> Corpus {
        self.filter_by(|d| expr.matches_tokens(&d.search_tokens()))
    }

    pub fn filter_by<F: FnMut(&PatentDocument) -> bool>(&self, mut keep: F) -> Corpus {
        let kept = self.documents.iter().filter(|d| keep(d)).cloned().collect();
        Corpus::from_validated(kept)
    }

    /// Writes the corpus as canonical JSONL.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for doc in &self.documents {
            serde_json::to_writer(&mut out, doc)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save_jsonl(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let path = path.as_ref();
        let io_err = |source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).map_err(io_err)?;
        fs::write(path, buf).map_err(io_err)
    }
}

pub fn filter_corpus(corpus: &Corpus, expr: &QueryExpr) -> Corpus {
    corpus.filter(expr)
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let corpus = match format {
        CorpusFormat::Jsonl => read_jsonl(BufReader::new(file))?,
        CorpusFormat::Csv => read_csv(file)?,
    };
    if corpus.is_empty() {
        return Err(CorpusError::Empty(path.display().to_string()));
    }
    Ok(corpus)
}

/// Reads JSONL records. Blank lines are skipped; line numbers are physical
/// 1-based lines.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Corpus, CorpusError> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: PatentDocument =
            serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        push_checked(&mut docs, &mut seen, doc, line_no)?;
    }
    Ok(Corpus::from_validated(docs))
}

/// Reads CSV with a header row naming the five fields. Line numbers count
/// the header as line 1.
pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Corpus, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in rdr.deserialize::<PatentDocument>().enumerate() {
        let fallback_line = i + 2;
        let doc = record.map_err(|e| CorpusError::Malformed {
            line: e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(fallback_line),
            message: e.to_string(),
        })?;
        push_checked(&mut docs, &mut seen, doc, fallback_line)?;
    }
    Ok(Corpus::from_validated(docs))
}

fn push_checked(
    docs: &mut Vec<PatentDocument>,
    seen: &mut HashSet<String>,
    doc: PatentDocument,
    line: usize,
) -> Result<(), CorpusError> {
    doc.validate()
        .map_err(|message| CorpusError::Malformed { line, message })?;
    if !seen.insert(doc.id.clone()) {
        return Err(CorpusError::DuplicateId { line, id: doc.id });
    }
    docs.push(doc);
    Ok(())
}
