//! Exact (quadratic) t-SNE for projecting embeddings to 2D.
//!
//! Gaussian input affinities with per-point bandwidths solved by bisection
//! to match the target perplexity, Student-t output affinities, and plain
//! momentum gradient descent with early exaggeration. Quadratic cost is fine
//! at the few-hundred-point scale this library works at.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const EXAGGERATION: f64 = 12.0;
const EXAGGERATION_ITERS: usize = 250;
const ENTROPY_TOLERANCE: f64 = 1e-5;
const P_MIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TsneResult {
    /// 2D points, in input order.
    pub points: Vec<[f64; 2]>,
    /// KL divergence against the (unexaggerated) input affinities, recorded
    /// after every iteration.
    pub kl_history: Vec<f64>,
}

/// Row-stochastic conditional affinities P(j|i): each row's bandwidth is
/// bisected until the row entropy matches `ln(perplexity)` within 1e-5.
pub fn conditional_affinities(vectors: &[Vec<f64>], perplexity: f64) -> Result<Array2<f64>> {
    let n = vectors.len();
    check_inputs(vectors, perplexity)?;
    let distances = squared_distances(vectors);
    let target_entropy = perplexity.ln();

    let mut p = Array2::zeros((n, n));
    let mut row = vec![0.0; n];
    for i in 0..n {
        // Shift by the row minimum so exp() stays in range; the resulting
        // probabilities and entropy are unchanged.
        let d_min = (0..n)
            .filter(|&j| j != i)
            .map(|j| distances[[i, j]])
            .fold(f64::INFINITY, f64::min);

        let mut beta = 1.0;
        let mut beta_min = 0.0_f64;
        let mut beta_max = f64::INFINITY;
        for _ in 0..200 {
            let mut sum = 0.0;
            let mut weighted = 0.0;
            for j in 0..n {
                if j == i {
                    row[j] = 0.0;
                    continue;
                }
                let shifted = distances[[i, j]] - d_min;
                let w = (-beta * shifted).exp();
                row[j] = w;
                sum += w;
                weighted += shifted * w;
            }
            let entropy = sum.ln() + beta * weighted / sum;
            let diff = entropy - target_entropy;
            if diff.abs() < ENTROPY_TOLERANCE {
                break;
            }
            if diff > 0.0 {
                beta_min = beta;
                beta = if beta_max.is_finite() {
                    (beta + beta_max) / 2.0
                } else {
                    beta * 2.0
                };
            } else {
                beta_max = beta;
                beta = (beta + beta_min) / 2.0;
            }
        }
        let sum: f64 = row.iter().sum();
        for j in 0..n {
            p[[i, j]] = row[j] / sum;
        }
    }
    Ok(p)
}

/// Project high-dimensional vectors to 2D. Exactly coincident input vectors
/// are accepted after a deterministic jitter of magnitude 1e-10. Returns
/// points in input order plus the per-iteration KL divergence.
pub fn tsne_project(vectors: &[Vec<f64>], config: &TsneConfig) -> Result<TsneResult> {
    let n = vectors.len();
    check_inputs(vectors, config.perplexity)?;

    let vectors = jitter_duplicates(vectors, config.seed);
    let p_conditional = conditional_affinities(&vectors, config.perplexity)?;

    // Symmetrize: p_ij = (P(j|i) + P(i|j)) / 2n.
    let mut p = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = (p_conditional[[i, j]] + p_conditional[[j, i]]) / (2.0 * n as f64);
                p[[i, j]] = v.max(P_MIN);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| [1e-4 * gaussian(&mut rng), 1e-4 * gaussian(&mut rng)])
        .collect();
    let mut velocity = vec![[0.0_f64; 2]; n];
    let mut gains = vec![[1.0_f64; 2]; n];
    let mut kl_history = Vec::with_capacity(config.iterations);

    let mut num = Array2::zeros((n, n));
    for iter in 0..config.iterations {
        let num_sum = student_t_weights(&y, &mut num);

        let exaggeration = if iter < EXAGGERATION_ITERS {
            EXAGGERATION
        } else {
            1.0
        };
        let momentum = if iter < EXAGGERATION_ITERS { 0.5 } else { 0.8 };

        for i in 0..n {
            let mut grad = [0.0_f64; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let q = (num[[i, j]] / num_sum).max(P_MIN);
                let coeff = 4.0 * (exaggeration * p[[i, j]] - q) * num[[i, j]];
                grad[0] += coeff * (y[i][0] - y[j][0]);
                grad[1] += coeff * (y[i][1] - y[j][1]);
            }
            for axis in 0..2 {
                // Per-parameter gains: grow while the gradient keeps its
                // direction against the velocity, shrink when it flips.
                gains[i][axis] = if grad[axis].signum() != velocity[i][axis].signum() {
                    gains[i][axis] + 0.2
                } else {
                    (gains[i][axis] * 0.8).max(0.01)
                };
                velocity[i][axis] = momentum * velocity[i][axis]
                    - config.learning_rate * gains[i][axis] * grad[axis];
            }
        }
        let mut mean = [0.0_f64; 2];
        for i in 0..n {
            y[i][0] += velocity[i][0];
            y[i][1] += velocity[i][1];
            mean[0] += y[i][0];
            mean[1] += y[i][1];
        }
        mean[0] /= n as f64;
        mean[1] /= n as f64;
        for point in y.iter_mut() {
            point[0] -= mean[0];
            point[1] -= mean[1];
        }

        // KL of the updated layout against the true (unexaggerated) P.
        let num_sum = student_t_weights(&y, &mut num);
        let mut kl = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let q = (num[[i, j]] / num_sum).max(P_MIN);
                    kl += p[[i, j]] * (p[[i, j]] / q).ln();
                }
            }
        }
        kl_history.push(kl);
    }

    Ok(TsneResult {
        points: y,
        kl_history,
    })
}

/// Fill `num` with the unnormalized Student-t weights of the 2D layout and
/// return their total.
fn student_t_weights(y: &[[f64; 2]], num: &mut Array2<f64>) -> f64 {
    let n = y.len();
    let mut num_sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = y[i][0] - y[j][0];
            let dy = y[i][1] - y[j][1];
            let w = 1.0 / (1.0 + dx * dx + dy * dy);
            num[[i, j]] = w;
            num[[j, i]] = w;
            num_sum += 2.0 * w;
        }
    }
    num_sum
}

fn check_inputs(vectors: &[Vec<f64>], perplexity: f64) -> Result<()> {
    let n = vectors.len();
    if n < 3 {
        return Err(Error::invalid(format!(
            "t-SNE needs at least 3 points, got {n}"
        )));
    }
    let dim = vectors[0].len();
    if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::invalid(
            "t-SNE inputs must share a positive dimension",
        ));
    }
    if perplexity.is_nan() || perplexity < 1.0 || perplexity >= (n - 1) as f64 {
        return Err(Error::invalid(format!(
            "perplexity {perplexity} infeasible for {n} points (need 1 <= perplexity < {})",
            n - 1
        )));
    }
    Ok(())
}

/// Exactly repeated vectors get a deterministic perturbation of magnitude
/// 1e-10 so bandwidth bisection stays well posed.
fn jitter_duplicates(vectors: &[Vec<f64>], seed: u64) -> Vec<Vec<f64>> {
    use std::collections::HashSet;
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    vectors
        .iter()
        .map(|v| {
            let bits: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
            if seen.insert(bits) {
                v.clone()
            } else {
                v.iter()
                    .map(|x| x + 1e-10 * (rng.gen::<f64>() - 0.5))
                    .collect()
            }
        })
        .collect()
}

fn squared_distances(vectors: &[Vec<f64>]) -> Array2<f64> {
    let n = vectors.len();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let dist: f64 = vectors[i]
                .iter()
                .zip(&vectors[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d[[i, j]] = dist;
            d[[j, i]] = dist;
        }
    }
    d
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller; consumes two uniforms per draw.
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
