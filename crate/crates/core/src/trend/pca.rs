use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TrendError;
use crate::embedding::dot;

pub const POWER_ITERATION_TOL: f64 = 1e-12;
pub const POWER_ITERATION_MAX: usize = 10_000;
const START_SEED: u64 = 0x5043_415f_7374_6172;

/// Mean and the top two principal directions of a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaBasis {
    pub mean: Vec<f64>,
    pub components: [Vec<f64>; 2],
    pub explained_variance: [f64; 2],
}

impl PcaBasis {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// `(components[0]·(v − mean), components[1]·(v − mean))`.
pub fn project(basis: &PcaBasis, vector: &[f64]) -> (f64, f64) {
    let centered: Vec<f64> = vector.iter().zip(&basis.mean).map(|(x, m)| x - m).collect();
    (dot(&basis.components[0], &centered), dot(&basis.components[1], &centered))
}

fn covariance(vectors: &[Vec<f64>], mean: &[f64]) -> Vec<Vec<f64>> {
    let d = mean.len();
    let mut cov = vec![vec![0.0; d]; d];
    let mut centered = vec![0.0; d];
    for v in vectors {
        for (c, (x, m)) in centered.iter_mut().zip(v.iter().zip(mean)) {
            *c = x - m;
        }
        for i in 0..d {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            for (acc, cj) in cov[i][i..].iter_mut().zip(&centered[i..]) {
                *acc += ci * cj;
            }
        }
    }
    let denom = (vectors.len() - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[i][j] / denom;
            cov[i][j] = v;
            cov[j][i] = v;
        }
    }
    cov
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn remove_component(v: &mut [f64], unit: &[f64]) {
    let p = dot(v, unit);
    for (x, u) in v.iter_mut().zip(unit) {
        *x -= p * u;
    }
}

/// Flips `v` so that its largest-magnitude entry (first on ties) is positive.
fn apply_sign_convention(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Dominant eigenvector of the symmetric PSD matrix `m`, searched in the
/// orthogonal complement of `exclude`. Returns `None` when `m` vanishes on
/// that subspace.
fn power_iteration(m: &[Vec<f64>], start: &[f64], exclude: Option<&[f64]>, zero_tol: f64) -> Option<Vec<f64>> {
    let mut v = start.to_vec();
    if let Some(e) = exclude {
        remove_component(&mut v, e);
    }
    normalize(&mut v);
    for iter in 0..POWER_ITERATION_MAX {
        let mut w = mat_vec(m, &v);
        if let Some(e) = exclude {
            remove_component(&mut w, e);
        }
        if normalize(&mut w) <= zero_tol {
            return None;
        }
        let delta = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if delta < POWER_ITERATION_TOL {
            log::trace!("power iteration converged after {} steps", iter + 1);
            return Some(v);
        }
    }
    log::debug!("power iteration hit {POWER_ITERATION_MAX} steps without reaching {POWER_ITERATION_TOL}");
    Some(v)
}

/// Fits a 2-component PCA by power iteration with deflation on the sample
/// covariance (divisor n − 1). Deterministic for a given input.
pub fn fit_pca(vectors: &[Vec<f64>]) -> Result<PcaBasis, TrendError> {
    if vectors.len() < 3 {
        return Err(TrendError::TooFewVectors(vectors.len()));
    }
    let d = vectors[0].len();
    if d < 2 {
        return Err(TrendError::DimensionTooSmall(d));
    }
    if vectors.iter().any(|v| v.len() != d) {
        return Err(TrendError::RaggedVectors);
    }
    if vectors.iter().all(|v| v == &vectors[0]) {
        return Err(TrendError::ZeroVariance);
    }

    let n = vectors.len() as f64;
    let mut mean = vec![0.0; d];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    let cov = covariance(vectors, &mean);
    let trace: f64 = (0..d).map(|i| cov[i][i]).sum();
    if trace <= 0.0 {
        return Err(TrendError::ZeroVariance);
    }
    let zero_tol = trace * 1e-14;

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let start0: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let start1: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let mut c0 = power_iteration(&cov, &start0, None, zero_tol).ok_or(TrendError::ZeroVariance)?;
    let lambda0 = dot(&c0, &mat_vec(&cov, &c0));

    // Deflation: search the complement of c0 in the same covariance.
    let mut c1 = match power_iteration(&cov, &start1, Some(&c0), zero_tol) {
        Some(v) => v,
        None => {
            let mut v = start1.clone();
            remove_component(&mut v, &c0);
            normalize(&mut v);
            v
        }
    };
    remove_component(&mut c1, &c0);
    normalize(&mut c1);
    let mut lambda1 = dot(&c1, &mat_vec(&cov, &c1)).max(0.0);
    if lambda1 <= zero_tol {
        lambda1 = 0.0;
    }

    let mut variance = [lambda0, lambda1];
    if variance[1] > variance[0] {
        std::mem::swap(&mut c0, &mut c1);
        variance.swap(0, 1);
    }
    apply_sign_convention(&mut c0);
    apply_sign_convention(&mut c1);

    Ok(PcaBasis {
        mean,
        components: [c0, c1],
        explained_variance: variance,
    })
}
