//! Monte Carlo reference for the rate model.
//!
//! Draws i.i.d. unit-variance circularly-symmetric Gaussian small-scale fading
//! and averages the instantaneous log-det rate and the instantaneous leakage.

use std::f64::consts::{FRAC_1_SQRT_2, LOG2_E};

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::power::PowerConstraints;
use crate::rate_model::PairContext;
use crate::rng::{self, Rng};

#[derive(Debug, Error, PartialEq)]
pub enum McError {
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("matrix is not positive definite (pivot {pivot} at column {col})")]
    NotPositiveDefinite { col: usize, pivot: f64 },
    #[error("fading matrix is {got_rows}x{got_cols}, expected {rows}x{cols}")]
    DimensionMismatch { rows: usize, cols: usize, got_rows: usize, got_cols: usize },
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Block-diagonal stack of `self` and `other`.
    pub fn block_diag(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out[(self.rows + i, self.cols + j)] = other[(i, j)];
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn sample_complex_gaussian(rng: &mut Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// `rows x cols` matrix of i.i.d. CN(0, 1) entries.
pub fn sample_small_scale(rows: usize, cols: usize, rng: &mut Rng) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| sample_complex_gaussian(rng)).collect();
    ComplexMatrix { rows, cols, data }
}

/// `log2 det(A)` of a Hermitian positive-definite matrix via Cholesky.
pub fn logdet2_hermitian(a: &ComplexMatrix) -> Result<f64, McError> {
    let n = a.rows;
    if a.cols != n {
        return Err(McError::NotSquare(a.rows, a.cols));
    }
    let scale = a.data.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in i..n {
            if (a[(i, j)] - a[(j, i)].conj()).norm() > 1e-12 * scale {
                return Err(McError::NotHermitian);
            }
        }
    }
    // lower factor, row-major, only j <= i used
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    let mut log_det = 0.0;
    for j in 0..n {
        let mut pivot = a[(j, j)].re;
        for k in 0..j {
            pivot -= l[j * n + k].norm_sqr();
        }
        if pivot.is_nan() || pivot <= 0.0 {
            return Err(McError::NotPositiveDefinite { col: j, pivot });
        }
        let d = pivot.sqrt();
        l[j * n + j] = Complex64::new(d, 0.0);
        log_det += pivot.ln();
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(log_det * LOG2_E)
}

/// `log2 det(I_M + H P Hᴴ / D)` for `H = S · diag(l)`, with `S` of size M x N.
pub fn instantaneous_rate(s: &ComplexMatrix, ctx: &PairContext, p: &[f64]) -> Result<f64, McError> {
    let (m, n) = (ctx.n_antennas, ctx.n_bs());
    if s.rows != m || s.cols != n || p.len() != n {
        return Err(McError::DimensionMismatch { rows: m, cols: n, got_rows: s.rows, got_cols: s.cols });
    }
    let mut a = ComplexMatrix::identity(m);
    for (col, (&pn, &g)) in p.iter().zip(&ctx.gains_sq).enumerate() {
        let w = pn * g / ctx.denom;
        if w == 0.0 {
            continue;
        }
        for i in 0..m {
            let si = s[(i, col)] * w;
            for j in 0..m {
                a[(i, j)] += si * s[(j, col)].conj();
            }
        }
    }
    logdet2_hermitian(&a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Streaming mean/variance (Welford), mergeable across shards.
#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Self { n, mean, m2 }
    }

    fn estimate(&self) -> McEstimate {
        let std_error = if self.n > 1 { (self.m2.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt() } else { 0.0 };
        McEstimate { mean: self.mean, std_error, n_samples: self.n }
    }
}

/// Sample mean of the instantaneous rate over `n_samples` fading draws.
pub fn ergodic_rate_mc(ctx: &PairContext, p: &[f64], n_samples: usize, rng: &mut Rng) -> McEstimate {
    assert!(n_samples >= 1, "at least one sample is required");
    let mut acc = Accumulator::default();
    for _ in 0..n_samples {
        let s = sample_small_scale(ctx.n_antennas, ctx.n_bs(), rng);
        acc.push(instantaneous_rate(&s, ctx, p).expect("I + HPHᴴ/D is positive definite"));
    }
    acc.estimate()
}

/// [`ergodic_rate_mc`] split over `shards` independent streams of `seed`,
/// evaluated in parallel and merged in shard order. The result depends on
/// `shards` but not on the number of worker threads.
pub fn ergodic_rate_mc_sharded(ctx: &PairContext, p: &[f64], n_samples: usize, seed: u64, shards: usize) -> McEstimate {
    assert!(n_samples >= shards && shards >= 1, "each shard needs at least one sample");
    let per = n_samples / shards;
    let parts: Vec<Accumulator> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let count = if k + 1 == shards { n_samples - per * (shards - 1) } else { per };
            let mut rng = rng::stream(seed, k as u64);
            let mut acc = Accumulator::default();
            for _ in 0..count {
                let s = sample_small_scale(ctx.n_antennas, ctx.n_bs(), &mut rng);
                acc.push(instantaneous_rate(&s, ctx, p).expect("I + HPHᴴ/D is positive definite"));
            }
            acc
        })
        .collect();
    parts.into_iter().fold(Accumulator::default(), Accumulator::merge).estimate()
}

/// Sample mean of the instantaneous leakage `Σ_n p_n c_n |s_n|²` at the
/// satellite MT.
pub fn ergodic_leakage_mc(c: &PowerConstraints, p: &[f64], n_samples: usize, rng: &mut Rng) -> McEstimate {
    assert!(n_samples >= 1, "at least one sample is required");
    let mut acc = Accumulator::default();
    for _ in 0..n_samples {
        let v: f64 = p.iter().zip(&c.leak_coeff).map(|(p, c)| p * c * sample_complex_gaussian(rng).norm_sqr()).sum();
        acc.push(v);
    }
    acc.estimate()
}
