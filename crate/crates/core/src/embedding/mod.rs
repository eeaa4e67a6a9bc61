//! Skip-gram word embeddings: vocabulary, training, similarity, persistence.

mod io;
mod math;
mod model;
mod train;
mod vocab;

use thiserror::Error;

pub use io::{load_model, model_to_string, parse_model, save_model, FORMAT_VERSION, MODEL_MAGIC};
pub(crate) use io::{parse_row, push_row};
pub use math::{cosine_similarity, dot, norm, softmax};
pub use model::{
    apply_gradients, generate_pairs, pair_loss_and_gradients, ContextPair, EmbeddingModel, Matrix,
    ModelMetadata, Objective, PairGradients, TrainConfig, TrainingMode,
};
pub use train::{initial_model, train, NegativeSampler};
pub use vocab::Vocabulary;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite value during training at epoch {epoch}, step {step}")]
    NonFinite { epoch: usize, step: usize },
    #[error("vectors have different lengths ({expected} vs {found})")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cosine similarity is undefined for a zero-norm vector")]
    ZeroNorm,
    #[error("model header mismatch: {0}")]
    Header(String),
    #[error("line {line}: row {word:?} has {found} values, expected {expected}")]
    RowDimension {
        word: String,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate word {0:?} in model file")]
    DuplicateWord(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Builds the vocabulary; see [`Vocabulary::build`].
pub fn build_vocab(
    streams: &[crate::text::TokenStream],
    min_count: u64,
) -> Result<Vocabulary, EmbeddingError> {
    Vocabulary::build(streams, min_count)
}
