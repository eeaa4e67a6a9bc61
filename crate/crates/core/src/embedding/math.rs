//! Scalar kernels shared by training and by the gradient checks.

use super::EmbeddingError;

/// Max-shifted softmax over a score vector.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&u| (u - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `a·b / (‖a‖‖b‖)`, clamped to [-1, 1]. Zero-norm inputs are an error.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64, EmbeddingError> {
    if a.len() != b.len() {
        return Err(EmbeddingError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(EmbeddingError::ZeroNorm);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Loss and score-space gradient for one (center, context) pair.
///
/// `rows` are the output vectors scored against the hidden vector `h`.
/// The returned coefficients `g` give the full gradient: the output row `j`
/// receives `g[j] * h` and the input row receives `Σ g[j] * rows[j]`.
pub(crate) struct ScoreGradient {
    pub loss: f64,
    pub coeffs: Vec<f64>,
}

/// Full softmax: `rows` is the whole output matrix, `target` the context
/// word. Loss is `-ln softmax(u)[target]`.
pub(crate) fn full_softmax_gradient<'a, I>(h: &[f64], rows: I, target: usize) -> ScoreGradient
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let scores: Vec<f64> = rows.into_iter().map(|r| dot(r, h)).collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = scores.iter().map(|&u| (u - max).exp()).sum::<f64>().ln() + max;
    let loss = log_sum - scores[target];
    let mut coeffs = softmax(&scores);
    coeffs[target] -= 1.0;
    ScoreGradient { loss, coeffs }
}

/// Negative sampling: `rows[0]` is the context word, the rest are negatives.
/// Loss is `-ln σ(o₀·h) - Σ ln σ(-oₖ·h)`.
pub(crate) fn negative_sampling_gradient<'a, I>(h: &[f64], rows: I) -> ScoreGradient
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut loss = 0.0;
    let mut coeffs = Vec::new();
    for (k, row) in rows.into_iter().enumerate() {
        let s = dot(row, h);
        if k == 0 {
            loss += softplus(-s);
            coeffs.push(sigmoid(s) - 1.0);
        } else {
            loss += softplus(s);
            coeffs.push(sigmoid(s));
        }
    }
    ScoreGradient { loss, coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_uniform() {
        assert_eq!(softmax(&[0.0; 4]), vec![0.25; 4]);
    }

    #[test]
    fn softmax_two_way() {
        let y = softmax(&[0.0, 3f64.ln()]);
        assert!((y[0] - 0.25).abs() < 1e-15);
        assert!((y[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn softmax_handles_large_scores() {
        let y = softmax(&[1000.0, 1000.0, -1000.0]);
        assert!((y[0] - 0.5).abs() < 1e-15);
        assert!(y[2] >= 0.0 && y.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn cosine_hand_values() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine_similarity(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]).unwrap();
        assert!((c - 8.0 / 9.0).abs() <= 1e-15);
    }

    #[test]
    fn cosine_rejects_zero_and_mismatch() {
        assert!(matches!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]),
            Err(EmbeddingError::ZeroNorm)
        ));
        assert!(cosine_similarity(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(800.0), 800.0);
        assert!(softplus(-800.0) >= 0.0);
    }
}
