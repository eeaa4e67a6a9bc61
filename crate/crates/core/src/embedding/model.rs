use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::math::{full_softmax_gradient, negative_sampling_gradient};
use super::vocab::Vocabulary;
use super::EmbeddingError;
use crate::text::TokenStream;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingMode {
    FullSoftmax,
    NegativeSampling,
}

impl fmt::Display for TrainingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainingMode::FullSoftmax => "full_softmax",
            TrainingMode::NegativeSampling => "negative_sampling",
        })
    }
}

impl FromStr for TrainingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "full_softmax" | "softmax" => Ok(TrainingMode::FullSoftmax),
            "negative_sampling" | "ns" => Ok(TrainingMode::NegativeSampling),
            other => Err(format!("unknown training mode {other:?}")),
        }
    }
}

/// Skip-gram hyperparameters. `threads == 1` is the deterministic mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_count: u64,
    pub mode: TrainingMode,
    pub negatives: usize,
    pub threads: usize,
    pub full_softmax_cap: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 300,
            window: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_count: 2,
            mode: TrainingMode::NegativeSampling,
            negatives: 5,
            threads: 1,
            full_softmax_cap: 20_000,
            seed: 42,
        }
    }
}

impl TrainConfig {
    /// Final learning rate as a fraction of the initial one.
    pub const LR_FLOOR: f64 = 1e-4;

    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let bad = |m: &str| Err(EmbeddingError::InvalidConfig(m.to_string()));
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if self.window == 0 {
            return bad("window must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be a positive finite number");
        }
        if self.min_count == 0 {
            return bad("min_count must be positive");
        }
        if self.mode == TrainingMode::NegativeSampling && self.negatives == 0 {
            return bad("negatives must be positive in negative_sampling mode");
        }
        if self.threads == 0 {
            return bad("threads must be positive");
        }
        if self.full_softmax_cap == 0 {
            return bad("full_softmax_cap must be positive");
        }
        Ok(())
    }

    pub fn is_deterministic(&self) -> bool {
        self.threads == 1
    }
}

/// Facts about the training corpus recorded alongside the vectors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelMetadata {
    pub config: Option<TrainConfig>,
    pub corpus_documents: usize,
    pub corpus_tokens: u64,
    pub counts: Vec<u64>,
}

/// A trained skip-gram model: vocabulary plus input (word) and output
/// (context) vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub vocab: Vocabulary,
    pub input: Matrix,
    pub output: Matrix,
    pub config: TrainConfig,
    pub corpus_documents: usize,
    pub corpus_tokens: u64,
}

impl EmbeddingModel {
    pub fn dim(&self) -> usize {
        self.input.cols()
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.vocab.index_of(word).map(|i| self.input.row(i))
    }

    pub fn is_finite(&self) -> bool {
        self.input.is_finite() && self.output.is_finite()
    }
}

/// One (center, context) training example as vocabulary indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ContextPair {
    pub center: usize,
    pub context: usize,
}

/// Enumerates skip-gram pairs with a fixed window. Out-of-vocabulary tokens
/// are removed before windowing.
pub fn generate_pairs(stream: &TokenStream, vocab: &Vocabulary, window: usize) -> Vec<ContextPair> {
    let ids: Vec<usize> = stream
        .tokens
        .iter()
        .filter_map(|t| vocab.index_of(t))
        .collect();
    let mut pairs = Vec::new();
    for (i, &center) in ids.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(ids.len().saturating_sub(1));
        for (j, &context) in ids.iter().enumerate().take(hi + 1).skip(lo) {
            if j != i {
                pairs.push(ContextPair { center, context });
            }
        }
    }
    pairs
}

/// Which objective a pair loss is computed under.
#[derive(Debug, Clone, Copy)]
pub enum Objective<'a> {
    FullSoftmax,
    NegativeSampling { negatives: &'a [usize] },
}

/// Loss of one pair and the gradient of every parameter row it touches.
/// Output gradients are merged per row and sorted by row index.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGradients {
    pub loss: f64,
    pub input_row: usize,
    pub input_grad: Vec<f64>,
    pub output_grads: Vec<(usize, Vec<f64>)>,
}

pub fn pair_loss_and_gradients(
    model: &EmbeddingModel,
    pair: ContextPair,
    objective: Objective<'_>,
) -> PairGradients {
    let h = model.input.row(pair.center);
    let (score, row_ids): (_, Vec<usize>) = match objective {
        Objective::FullSoftmax => (
            full_softmax_gradient(h, model.output.iter_rows(), pair.context),
            (0..model.output.rows()).collect(),
        ),
        Objective::NegativeSampling { negatives } => {
            let ids: Vec<usize> = std::iter::once(pair.context)
                .chain(negatives.iter().copied())
                .collect();
            (
                negative_sampling_gradient(h, ids.iter().map(|&j| model.output.row(j))),
                ids,
            )
        }
    };

    let dim = model.dim();
    let mut input_grad = vec![0.0; dim];
    let mut merged: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (&j, &g) in row_ids.iter().zip(&score.coeffs) {
        for (acc, o) in input_grad.iter_mut().zip(model.output.row(j)) {
            *acc += g * o;
        }
        let entry = merged.entry(j).or_insert_with(|| vec![0.0; dim]);
        for (acc, x) in entry.iter_mut().zip(h) {
            *acc += g * x;
        }
    }
    PairGradients {
        loss: score.loss,
        input_row: pair.center,
        input_grad,
        output_grads: merged.into_iter().collect(),
    }
}

/// Applies one plain SGD step computed by [`pair_loss_and_gradients`].
pub fn apply_gradients(model: &mut EmbeddingModel, grads: &PairGradients, learning_rate: f64) {
    for (p, g) in model.input.row_mut(grads.input_row).iter_mut().zip(&grads.input_grad) {
        *p -= learning_rate * g;
    }
    for (j, g) in &grads.output_grads {
        for (p, gj) in model.output.row_mut(*j).iter_mut().zip(g) {
            *p -= learning_rate * gj;
        }
    }
}
