//! Nonnegative matrix factorization with Lee-Seung multiplicative updates
//! for the Frobenius objective `‖X − UV‖_F`.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const EPS: f64 = 1e-12;
const RELATIVE_STOP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct NmfResult {
    pub u: Array2<f64>,
    pub v: Array2<f64>,
    /// Frobenius residual `‖X − UV‖_F` after each full update; guaranteed
    /// non-increasing up to floating-point noise.
    pub residuals: Vec<f64>,
}

/// Factorize a nonnegative m x n matrix as `X ≈ U V` with `U: m x r`,
/// `V: r x n`. Factors start uniform on (0, 1] from the seed; iteration
/// stops at `iterations` or when the relative residual change drops below
/// 1e-6.
pub fn nmf(x: &Array2<f64>, r: usize, iterations: usize, seed: u64) -> Result<NmfResult> {
    let (m, n) = x.dim();
    if let Some(bad) = x.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::invalid(format!(
            "NMF input must be nonnegative and finite, found {bad}"
        )));
    }
    if r == 0 || r > m.min(n) {
        return Err(Error::invalid(format!(
            "rank must be in 1..={}, got {r}",
            m.min(n)
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // 1 - gen() maps [0, 1) onto (0, 1]: strictly positive starting factors.
    let mut u = Array2::from_shape_simple_fn((m, r), || 1.0 - rng.gen::<f64>());
    let mut v = Array2::from_shape_simple_fn((r, n), || 1.0 - rng.gen::<f64>());

    let mut residuals = Vec::new();
    let mut previous = residual(x, &u, &v);
    for _ in 0..iterations {
        // U <- U .* (X Vᵀ) ./ (U V Vᵀ + eps)
        let numer_u = x.dot(&v.t());
        let denom_u = u.dot(&v.dot(&v.t()));
        ndarray::Zip::from(&mut u)
            .and(&numer_u)
            .and(&denom_u)
            .for_each(|u_val, &num, &den| *u_val *= num / (den + EPS));

        // V <- V .* (Uᵀ X) ./ (Uᵀ U V + eps)
        let numer_v = u.t().dot(x);
        let denom_v = u.t().dot(&u).dot(&v);
        ndarray::Zip::from(&mut v)
            .and(&numer_v)
            .and(&denom_v)
            .for_each(|v_val, &num, &den| *v_val *= num / (den + EPS));

        let current = residual(x, &u, &v);
        residuals.push(current);
        if (previous - current).abs() <= RELATIVE_STOP * previous.max(EPS) {
            break;
        }
        previous = current;
    }

    Ok(NmfResult { u, v, residuals })
}

fn residual(x: &Array2<f64>, u: &Array2<f64>, v: &Array2<f64>) -> f64 {
    let approx = u.dot(v);
    x.iter()
        .zip(approx.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}
