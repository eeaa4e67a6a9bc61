use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trendlens_core::embedding::{
    build_vocab, cosine_similarity, generate_pairs, initial_model, model_to_string, pair_loss_and_gradients,
    parse_model, softmax, train, ContextPair, EmbeddingModel, Matrix, Objective, TrainConfig, TrainingMode,
    Vocabulary,
};
use trendlens_core::text::TokenStream;

fn stream(id: &str, tokens: &[&str]) -> TokenStream {
    TokenStream {
        doc_id: id.into(),
        tokens: tokens.iter().map(|t| t.to_string()).collect(),
    }
}

fn tiny_model(v: usize, d: usize, input: Vec<f64>, output: Vec<f64>) -> EmbeddingModel {
    let words = (0..v).map(|i| format!("w{i}")).collect();
    let vocab = Vocabulary::from_parts(words, vec![1; v]).unwrap();
    let config = TrainConfig {
        dim: d,
        min_count: 1,
        ..TrainConfig::default()
    };
    let mut model = initial_model(vocab, &config, &mut ChaCha8Rng::seed_from_u64(0));
    model.input = Matrix::from_vec(v, d, input);
    model.output = Matrix::from_vec(v, d, output);
    model
}

/// Largest relative gap between analytic and central-difference gradients
/// over every parameter of the model.
fn max_gradient_error(model: &EmbeddingModel, pair: ContextPair, objective: Objective<'_>) -> f64 {
    const H: f64 = 1e-5;
    let g = pair_loss_and_gradients(model, pair, objective);
    let (v, d) = (model.vocab.len(), model.dim());
    let mut worst = 0.0f64;
    for output in [false, true] {
        for row in 0..v {
            for col in 0..d {
                let analytic = if output {
                    g.output_grads.iter().find(|(j, _)| *j == row).map_or(0.0, |(_, gr)| gr[col])
                } else if row == pair.center {
                    g.input_grad[col]
                } else {
                    0.0
                };
                let loss_at = |delta: f64| {
                    let mut m = model.clone();
                    let mat = if output { &mut m.output } else { &mut m.input };
                    mat.row_mut(row)[col] += delta;
                    pair_loss_and_gradients(&m, pair, objective).loss
                };
                let numeric = (loss_at(H) - loss_at(-H)) / (2.0 * H);
                let scale = analytic.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max((analytic - numeric).abs() / scale);
            }
        }
    }
    worst
}

proptest! {
    #[test]
    fn softmax_sums_to_one_and_ignores_shifts(
        u in prop::collection::vec(-30.0f64..30.0, 1..200),
        c in -100.0f64..100.0,
    ) {
        let y = softmax(&u);
        prop_assert!((y.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(y.iter().all(|&p| p > 0.0 && p <= 1.0));
        let shifted: Vec<f64> = u.iter().map(|x| x + c).collect();
        for (a, b) in y.iter().zip(softmax(&shifted)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn cosine_is_symmetric_bounded_and_scale_free(
        (a, b) in (1usize..16).prop_flat_map(|d| (
            prop::collection::vec(-5.0f64..5.0, d),
            prop::collection::vec(-5.0f64..5.0, d),
        )),
        lambda in 0.01f64..100.0,
    ) {
        prop_assume!(a.iter().any(|x| *x != 0.0) && b.iter().any(|x| *x != 0.0));
        let ab = cosine_similarity(&a, &b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&ab));
        prop_assert!((ab - cosine_similarity(&b, &a).unwrap()).abs() <= 1e-12);
        let scaled: Vec<f64> = a.iter().map(|x| x * lambda).collect();
        prop_assert!((ab - cosine_similarity(&scaled, &b).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences(seed in any::<u64>(), negative_sampling in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (v, d) = (rng.gen_range(2..=8), rng.gen_range(1..=4));
        let mut gen = || (0..v * d).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
        let model = tiny_model(v, d, gen(), gen());
        let pair = ContextPair { center: rng.gen_range(0..v), context: rng.gen_range(0..v) };
        let negatives: Vec<usize> = (0..3).map(|i| (pair.context + 1 + i) % v).filter(|&j| j != pair.context).collect();
        let objective = if negative_sampling {
            Objective::NegativeSampling { negatives: &negatives }
        } else {
            Objective::FullSoftmax
        };
        prop_assert!(max_gradient_error(&model, pair, objective) <= 1e-5);
    }
}

#[test]
fn softmax_examples() {
    assert_eq!(softmax(&[0.0; 4]), [0.25; 4]);
    let y = softmax(&[0.0, 3f64.ln()]);
    assert!((y[0] - 0.25).abs() < 1e-15 && (y[1] - 0.75).abs() < 1e-15);
}

#[test]
fn cosine_examples() {
    assert_eq!(cosine_similarity(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
    assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
    assert!((cosine_similarity(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]).unwrap() - 8.0 / 9.0).abs() <= 1e-15);
    assert!(cosine_similarity(&[0.0, 0.0], &[1.0, 1.0]).is_err());
}

#[test]
fn hand_set_gradients_v3_d2() {
    let model = tiny_model(3, 2, vec![0.3, -0.2, 0.5, 0.1, -0.4, 0.7], vec![0.2, 0.6, -0.5, 0.3, 0.9, -0.1]);
    let pair = ContextPair { center: 1, context: 2 };
    assert!(max_gradient_error(&model, pair, Objective::FullSoftmax) <= 1e-6);
    assert!(max_gradient_error(&model, pair, Objective::NegativeSampling { negatives: &[0, 1] }) <= 1e-6);
}

#[test]
fn zero_output_vectors_give_uniform_loss() {
    let model = tiny_model(5, 3, vec![0.1; 15], vec![0.0; 15]);
    let g = pair_loss_and_gradients(&model, ContextPair { center: 0, context: 3 }, Objective::FullSoftmax);
    assert!((g.loss - 5f64.ln()).abs() < 1e-12);
}

#[test]
fn vocabulary_and_pairs() {
    let streams = [stream("1", &["a", "b", "a"]), stream("2", &["a"])];
    let v = build_vocab(&streams, 2).unwrap();
    assert_eq!(v.words(), ["a"]);
    let v = build_vocab(&streams, 1).unwrap();
    assert_eq!(v.words(), ["a", "b"]);
    assert_eq!(v.counts(), [3, 1]);
    let ties = build_vocab(&[stream("1", &["y", "x", "y", "x"])], 1).unwrap();
    assert_eq!(ties.words(), ["x", "y"]);

    let abc = build_vocab(&[stream("1", &["a", "b", "c"])], 1).unwrap();
    let ids = |p: &[ContextPair]| -> Vec<(String, String)> {
        p.iter().map(|p| (abc.word(p.center).to_string(), abc.word(p.context).to_string())).collect()
    };
    let pairs = generate_pairs(&stream("1", &["a", "b", "c"]), &abc, 1);
    let s = |a: &str, b: &str| (a.to_string(), b.to_string());
    assert_eq!(ids(&pairs), [s("a", "b"), s("b", "a"), s("b", "c"), s("c", "b")]);
    assert_eq!(generate_pairs(&stream("1", &["a", "b", "c"]), &abc, 10).len(), 6);
    let pairs = generate_pairs(&stream("1", &["a", "x", "b"]), &abc, 1);
    assert_eq!(ids(&pairs), [s("a", "b"), s("b", "a")]);
}

fn corpus() -> Vec<TokenStream> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let words = ["solar", "panel", "grid", "battery", "charge", "cell", "inverter", "storage"];
    (0..30)
        .map(|i| TokenStream {
            doc_id: format!("d{i}"),
            tokens: (0..12).map(|_| words[rng.gen_range(0..words.len())].to_string()).collect(),
        })
        .collect()
}

#[test]
fn epochs_zero_returns_initialization() {
    let config = TrainConfig {
        dim: 8,
        epochs: 0,
        min_count: 1,
        seed: 3,
        ..TrainConfig::default()
    };
    let streams = corpus();
    let model = train(&streams, &config).unwrap();
    let vocab = build_vocab(&streams, 1).unwrap();
    let init = initial_model(vocab, &config, &mut ChaCha8Rng::seed_from_u64(3));
    assert_eq!(model.input, init.input);
    assert_eq!(model.output, init.output);
}

#[test]
fn deterministic_training_saves_identical_bytes() {
    for mode in [TrainingMode::FullSoftmax, TrainingMode::NegativeSampling] {
        let config = TrainConfig {
            dim: 10,
            epochs: 3,
            min_count: 1,
            mode,
            seed: 5,
            ..TrainConfig::default()
        };
        let a = model_to_string(&train(&corpus(), &config).unwrap(), true);
        let b = model_to_string(&train(&corpus(), &config).unwrap(), true);
        assert_eq!(a, b);
        let back = parse_model(&a).unwrap();
        assert_eq!(model_to_string(&back, true), a);
    }
}

#[test]
fn parallel_training_stays_finite() {
    let config = TrainConfig {
        dim: 10,
        epochs: 3,
        min_count: 1,
        threads: 4,
        ..TrainConfig::default()
    };
    assert!(train(&corpus(), &config).unwrap().is_finite());
}

#[test]
fn model_file_validation() {
    let m = parse_model("trendlens-w2v 1 2 3 7\nfoo 0.1 0.2 0.3\nbar 1 2 3\n").unwrap();
    assert_eq!((m.vocab.len(), m.dim(), m.seed()), (2, 3, 7));
    let err = parse_model("trendlens-w2v 1 2 3 7\nfoo 0.1 0.2 0.3\nbar 1 2\n").unwrap_err();
    assert!(err.to_string().contains("bar"), "{err}");
}

#[test]
fn full_softmax_is_capped() {
    let config = TrainConfig {
        dim: 4,
        min_count: 1,
        mode: TrainingMode::FullSoftmax,
        full_softmax_cap: 3,
        ..TrainConfig::default()
    };
    assert!(train(&corpus(), &config).is_err());
}
