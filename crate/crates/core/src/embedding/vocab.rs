use std::collections::HashMap;

use super::EmbeddingError;
use crate::text::TokenStream;

/// Vocabulary ordered by descending count, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn build(streams: &[TokenStream], min_count: u64) -> Result<Self, EmbeddingError> {
        if min_count == 0 {
            return Err(EmbeddingError::InvalidConfig("min_count must be >= 1".into()));
        }
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for stream in streams {
            for t in &stream.tokens {
                *freq.entry(t.as_str()).or_default() += 1;
            }
        }
        let mut kept: Vec<(&str, u64)> = freq.into_iter().filter(|&(_, c)| c >= min_count).collect();
        if kept.is_empty() {
            return Err(EmbeddingError::EmptyVocabulary);
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(Self::from_parts(
            kept.iter().map(|(w, _)| w.to_string()).collect(),
            kept.iter().map(|&(_, c)| c).collect(),
        )
        .expect("words are unique"))
    }

    /// Builds a vocabulary from words in the given order. Fails on
    /// duplicates, returning the offending word.
    pub fn from_parts(words: Vec<String>, counts: Vec<u64>) -> Result<Self, String> {
        assert_eq!(words.len(), counts.len());
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(w.clone());
            }
        }
        Ok(Self {
            words,
            counts,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }
}
