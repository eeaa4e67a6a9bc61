//! Tokenization and the two-tier stopword regime.
//!
//! Abstracts are lowercased and split on every character that is not a
//! letter or digit. Stopwords come in three tiers: a bundled English base
//! list, candidates generated from the corpus, and a human-curated list.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUNDLED_ENGLISH: &str = include_str!("../data/english_stopwords.txt");

#[derive(Debug, Error)]
pub enum StopwordError {
    #[error("failed to read stopword file {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to write stopword file {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: invalid stopword entry {entry:?} (must be a single letter/digit token)")]
    InvalidEntry { line: usize, entry: String },
}

/// Lowercases `text` and splits it into maximal runs of letters and digits.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            // Some lowercase mappings emit combining marks; keep only the
            // alphanumeric part so tokens re-tokenize to themselves.
            current.extend(c.to_lowercase().filter(|l| l.is_alphanumeric()));
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// The tokens of one document, in source order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub doc_id: String,
    pub tokens: Vec<String>,
}

impl TokenStream {
    pub fn from_text(doc_id: impl Into<String>, text: &str) -> Self {
        Self {
            doc_id: doc_id.into(),
            tokens: tokenize(text),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopwordTier {
    Base,
    Generated,
    Curated,
}

impl fmt::Display for StopwordTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopwordTier::Base => "base",
            StopwordTier::Generated => "generated",
            StopwordTier::Curated => "curated",
        })
    }
}

impl FromStr for StopwordTier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "base" => Ok(StopwordTier::Base),
            "generated" => Ok(StopwordTier::Generated),
            "curated" => Ok(StopwordTier::Curated),
            other => Err(format!("unknown stopword tier {other:?}")),
        }
    }
}

/// An ordered, duplicate-free set of lowercase stop tokens.
#[derive(Debug, Clone)]
pub struct StopwordList {
    entries: Vec<String>,
    lookup: HashSet<String>,
    tier: StopwordTier,
}

impl PartialEq for StopwordList {
    fn eq(&self, other: &Self) -> bool {
        self.tier == other.tier && self.entries == other.entries
    }
}

fn is_valid_entry(entry: &str) -> bool {
    !entry.is_empty() && entry.chars().all(char::is_alphanumeric)
}

impl StopwordList {
    pub fn empty(tier: StopwordTier) -> Self {
        Self {
            entries: Vec::new(),
            lookup: HashSet::new(),
            tier,
        }
    }

    /// Builds a list from raw entries. Entries are lowercased; an entry that
    /// is not a single letter/digit token is rejected with its 1-based
    /// position.
    pub fn from_entries<I, S>(tier: StopwordTier, entries: I) -> Result<Self, StopwordError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut list = Self::empty(tier);
        for (i, raw) in entries.into_iter().enumerate() {
            list.insert_checked(raw.as_ref(), i + 1)?;
        }
        Ok(list)
    }

    fn insert_checked(&mut self, raw: &str, line: usize) -> Result<(), StopwordError> {
        let entry = raw.to_lowercase();
        if !is_valid_entry(&entry) {
            return Err(StopwordError::InvalidEntry {
                line,
                entry: raw.to_string(),
            });
        }
        self.insert(entry);
        Ok(())
    }

    fn insert(&mut self, entry: String) {
        if self.lookup.insert(entry.clone()) {
            self.entries.push(entry);
        }
    }

    /// The bundled 318-entry English list, tier `base`.
    pub fn bundled_english() -> Self {
        Self::parse(BUNDLED_ENGLISH, StopwordTier::Base).expect("bundled stopword list is valid")
    }

    /// Parses the line-oriented format: one token per line, blank lines and
    /// lines starting with `#` ignored.
    pub fn parse(text: &str, tier: StopwordTier) -> Result<Self, StopwordError> {
        let mut list = Self::empty(tier);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            list.insert_checked(line, i + 1)?;
        }
        Ok(list)
    }

    pub fn load(path: impl AsRef<Path>, tier: StopwordTier) -> Result<Self, StopwordError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| StopwordError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, tier)
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            out.push_str(entry);
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), StopwordError> {
        let path = path.as_ref();
        fs::write(path, self.to_file_string()).map_err(|source| StopwordError::Write {
            path: path.display().to_string(),
            source,
        })
    }

    /// Appends the entries of `other` that are not already present. The
    /// tier of `self` is kept.
    pub fn merge(&mut self, other: &StopwordList) {
        for entry in &other.entries {
            self.insert(entry.clone());
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.lookup.contains(token)
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn tier(&self) -> StopwordTier {
        self.tier
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Returns true if any of `lists` contains `token`.
pub fn is_stopword(token: &str, lists: &[&StopwordList]) -> bool {
    lists.iter().any(|l| l.contains(token))
}

/// Removes every token found in the union of `lists`, keeping survivor order.
pub fn filter_stopwords(stream: &TokenStream, lists: &[&StopwordList]) -> TokenStream {
    TokenStream {
        doc_id: stream.doc_id.clone(),
        tokens: stream
            .tokens
            .iter()
            .filter(|t| !is_stopword(t, lists))
            .cloned()
            .collect(),
    }
}
