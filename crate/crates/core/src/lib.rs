//! Patent technology-trend analysis.
//!
//! The pipeline filters a patent corpus with a boolean query, tokenizes and
//! strips stopwords, trains skip-gram embeddings, extracts per-document
//! keywords by cosine similarity to the document embedding, keeps the most
//! frequent keywords per industry, projects them to 2-D with PCA and groups
//! them by single-linkage threshold clustering.

pub mod corpus;
pub mod embedding;
pub mod keywords;
pub mod pipeline;
pub mod query;
pub mod report;
pub mod svg;
pub mod text;
pub mod trend;

pub use corpus::{filter_corpus, load_corpus, Corpus, CorpusFormat, PatentDocument};
pub use embedding::{cosine_similarity, load_model, save_model, train, EmbeddingModel, TrainConfig, TrainingMode};
pub use keywords::{extract_keywords, Embedder, ExtractionResult, FileEmbedder, KeywordScore, ReferenceEmbedder};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineError, PipelineOutcome, Stage, TrendReport};
pub use query::{eval_query, parse_query, QueryExpr};
pub use text::{filter_stopwords, tokenize, StopwordList, StopwordTier, TokenStream};
