#![allow(dead_code)]

use ou_intervene::{Matrix, OuModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Random stable matrix: either a Gershgorin-shifted random matrix or a
/// negative definite symmetric part plus a skew part.
pub fn stable_matrix(rng: &mut ChaCha8Rng, p: usize) -> Matrix {
    let g = uniform_matrix(rng, p, p, -1.0, 1.0);
    if rng.random_bool(0.5) {
        let shift = g.norm_inf() + rng.random_range(0.1..1.0);
        &g - &Matrix::identity(p).scale(shift)
    } else {
        let h = uniform_matrix(rng, p, p, -1.0, 1.0);
        let spd = &(&g * &g.transpose()) + &Matrix::identity(p).scale(0.2);
        let skew = &h - &h.transpose();
        &skew - &spd
    }
}

/// Random upper-triangular 3x3 with diagonal in [-3, -0.1] and off-diagonal
/// entries in [-2, 2].
pub fn upper_triangular(rng: &mut ChaCha8Rng) -> Matrix {
    let mut b = Matrix::zeros(3, 3);
    for i in 0..3 {
        b[(i, i)] = rng.random_range(-3.0..-0.1);
        for j in (i + 1)..3 {
            b[(i, j)] = rng.random_range(-2.0..2.0);
        }
    }
    b
}

pub fn triangular_model(b: Matrix, a: Vec<f64>) -> OuModel {
    OuModel::new(vec![0.0; 3], a, b, Matrix::identity(3)).unwrap()
}

/// Model used throughout the examples: upper-triangular speed, identity noise.
pub fn reference_model() -> OuModel {
    triangular_model(
        Matrix::from_rows(&[[-1.0, 0.5, 0.3], [0.0, -2.0, 0.7], [0.0, 0.0, -1.5]]).unwrap(),
        vec![1.0, 2.0, 3.0],
    )
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Original drift rows `i != m` (0-based `m`) evaluated with `x_m = c`.
pub fn substituted_drift(model: &OuModel, m: usize, c: f64, y: &[f64]) -> Vec<f64> {
    let mut x = y.to_vec();
    x.insert(m, c);
    let mut drift = model.drift(&x);
    drift.remove(m);
    drift
}
