//! Skip-gram SGD training.
//!
//! Parameters live in relaxed atomics so that the parallel mode can apply
//! unsynchronized (Hogwild-style) row updates without data races. With one
//! worker the update order is fixed and training is bit-reproducible.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::math::{full_softmax_gradient, negative_sampling_gradient};
use super::model::{generate_pairs, ContextPair, EmbeddingModel, Matrix, TrainConfig, TrainingMode};
use super::vocab::Vocabulary;
use super::EmbeddingError;
use crate::text::TokenStream;

/// Samples negatives from the unigram distribution raised to 0.75.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    pub const POWER: f64 = 0.75;

    pub fn new(vocab: &Vocabulary) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = vocab
            .counts()
            .iter()
            .map(|&c| {
                acc += (c.max(1) as f64).powf(Self::POWER);
                acc
            })
            .collect();
        for c in &mut cumulative {
            *c /= acc;
        }
        Self { cumulative }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }

    /// Draws `k` negatives, dropping any that hit `target`.
    pub fn sample_excluding<R: Rng>(&self, rng: &mut R, k: usize, target: usize, out: &mut Vec<usize>) {
        out.clear();
        for _ in 0..k {
            let s = self.sample(rng);
            if s != target {
                out.push(s);
            }
        }
    }
}

struct SharedMatrix {
    cols: usize,
    data: Vec<AtomicU64>,
}

impl SharedMatrix {
    fn new(m: Matrix) -> Self {
        Self {
            cols: m.cols(),
            data: m.into_vec().into_iter().map(|v| AtomicU64::new(v.to_bits())).collect(),
        }
    }

    fn read_row(&self, i: usize, out: &mut [f64]) {
        let row = &self.data[i * self.cols..(i + 1) * self.cols];
        for (o, a) in out.iter_mut().zip(row) {
            *o = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }

    fn add_scaled(&self, i: usize, scale: f64, delta: &[f64]) {
        let row = &self.data[i * self.cols..(i + 1) * self.cols];
        for (a, d) in row.iter().zip(delta) {
            let v = f64::from_bits(a.load(Ordering::Relaxed)) + scale * d;
            a.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn into_matrix(self, rows: usize) -> Matrix {
        let cols = self.cols;
        Matrix::from_vec(
            rows,
            cols,
            self.data.into_iter().map(|a| f64::from_bits(a.into_inner())).collect(),
        )
    }
}

/// Uniform `[-0.5/D, 0.5/D]` input vectors and zero output vectors.
pub fn initial_model(vocab: Vocabulary, config: &TrainConfig, rng: &mut ChaCha8Rng) -> EmbeddingModel {
    let v = vocab.len();
    let d = config.dim;
    let bound = 0.5 / d as f64;
    let input: Vec<f64> = (0..v * d).map(|_| rng.gen_range(-bound..=bound)).collect();
    EmbeddingModel {
        vocab,
        input: Matrix::from_vec(v, d, input),
        output: Matrix::zeros(v, d),
        config: config.clone(),
        corpus_documents: 0,
        corpus_tokens: 0,
    }
}

struct Shared<'a> {
    input: SharedMatrix,
    output: SharedMatrix,
    config: &'a TrainConfig,
    sampler: Option<NegativeSampler>,
    vocab_size: usize,
    total_steps: usize,
    step: AtomicUsize,
}

impl Shared<'_> {
    fn learning_rate(&self, step: usize) -> f64 {
        let progress = step as f64 / self.total_steps.max(1) as f64;
        self.config.learning_rate * (1.0 - (1.0 - TrainConfig::LR_FLOOR) * progress.min(1.0))
    }

    /// Runs SGD over `pairs`; returns the summed loss.
    fn run_worker(&self, pairs: &[ContextPair], rng: &mut ChaCha8Rng, epoch: usize) -> Result<f64, EmbeddingError> {
        let dim = self.config.dim;
        let mut h = vec![0.0; dim];
        let mut grad_h = vec![0.0; dim];
        let mut rows: Vec<f64> = Vec::new();
        let mut ids: Vec<usize> = Vec::new();
        let mut negatives = Vec::new();
        let mut total = 0.0;

        for pair in pairs {
            let step = self.step.fetch_add(1, Ordering::Relaxed);
            let lr = self.learning_rate(step);
            self.input.read_row(pair.center, &mut h);

            ids.clear();
            match self.config.mode {
                TrainingMode::FullSoftmax => ids.extend(0..self.vocab_size),
                TrainingMode::NegativeSampling => {
                    let sampler = self.sampler.as_ref().expect("sampler present");
                    sampler.sample_excluding(rng, self.config.negatives, pair.context, &mut negatives);
                    ids.push(pair.context);
                    ids.extend_from_slice(&negatives);
                }
            }
            rows.resize(ids.len() * dim, 0.0);
            for (k, &j) in ids.iter().enumerate() {
                self.output.read_row(j, &mut rows[k * dim..(k + 1) * dim]);
            }
            let row_iter = rows.chunks_exact(dim);
            let score = match self.config.mode {
                TrainingMode::FullSoftmax => full_softmax_gradient(&h, row_iter, pair.context),
                TrainingMode::NegativeSampling => negative_sampling_gradient(&h, row_iter),
            };
            if !score.loss.is_finite() || score.coeffs.iter().any(|g| !g.is_finite()) {
                return Err(EmbeddingError::NonFinite { epoch, step });
            }
            total += score.loss;

            grad_h.iter_mut().for_each(|g| *g = 0.0);
            for (k, &g) in score.coeffs.iter().enumerate() {
                for (acc, o) in grad_h.iter_mut().zip(&rows[k * dim..(k + 1) * dim]) {
                    *acc += g * o;
                }
            }
            for (&j, &g) in ids.iter().zip(&score.coeffs) {
                if g != 0.0 {
                    self.output.add_scaled(j, -lr * g, &h);
                }
            }
            self.input.add_scaled(pair.center, -lr, &grad_h);
            if grad_h.iter().any(|g| !g.is_finite()) {
                return Err(EmbeddingError::NonFinite { epoch, step });
            }
        }
        Ok(total)
    }
}

fn worker_seed(seed: u64, epoch: usize, worker: usize) -> u64 {
    seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (worker as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Trains a skip-gram model on `streams`.
pub fn train(streams: &[TokenStream], config: &TrainConfig) -> Result<EmbeddingModel, EmbeddingError> {
    config.validate()?;
    if streams.iter().all(|s| s.is_empty()) {
        return Err(EmbeddingError::EmptyVocabulary);
    }
    let vocab = Vocabulary::build(streams, config.min_count)?;
    if config.mode == TrainingMode::FullSoftmax && vocab.len() > config.full_softmax_cap {
        return Err(EmbeddingError::InvalidConfig(format!(
            "full_softmax requires V <= {} but V = {}; use negative_sampling",
            config.full_softmax_cap,
            vocab.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = initial_model(vocab, config, &mut rng);
    model.corpus_documents = streams.len();
    model.corpus_tokens = streams.iter().map(|s| s.len() as u64).sum();

    let mut pairs: Vec<ContextPair> = streams
        .iter()
        .flat_map(|s| generate_pairs(s, &model.vocab, config.window))
        .collect();
    if config.epochs == 0 || pairs.is_empty() {
        if pairs.is_empty() {
            log::warn!("no training pairs; returning the initial model");
        }
        return Ok(model);
    }

    let sampler = (config.mode == TrainingMode::NegativeSampling).then(|| NegativeSampler::new(&model.vocab));
    let v = model.vocab.len();
    let shared = Shared {
        input: SharedMatrix::new(model.input.clone()),
        output: SharedMatrix::new(model.output.clone()),
        config,
        sampler,
        vocab_size: v,
        total_steps: config.epochs * pairs.len(),
        step: AtomicUsize::new(0),
    };

    for epoch in 0..config.epochs {
        pairs.shuffle(&mut rng);
        let loss = if config.threads == 1 {
            let mut wrng = ChaCha8Rng::seed_from_u64(worker_seed(config.seed, epoch, 0));
            shared.run_worker(&pairs, &mut wrng, epoch)?
        } else {
            let chunk = pairs.len().div_ceil(config.threads);
            std::thread::scope(|scope| {
                let handles: Vec<_> = pairs
                    .chunks(chunk)
                    .enumerate()
                    .map(|(w, part)| {
                        let shared = &shared;
                        scope.spawn(move || {
                            let mut wrng = ChaCha8Rng::seed_from_u64(worker_seed(config.seed, epoch, w));
                            shared.run_worker(part, &mut wrng, epoch)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .sum::<Result<f64, _>>()
            })?
        };
        log::debug!(
            "epoch {}/{}: mean pair loss {:.6}",
            epoch + 1,
            config.epochs,
            loss / pairs.len() as f64
        );
    }

    model.input = shared.input.into_matrix(v);
    model.output = shared.output.into_matrix(v);
    if !model.is_finite() {
        return Err(EmbeddingError::NonFinite {
            epoch: config.epochs,
            step: shared.step.into_inner(),
        });
    }
    Ok(model)
}
