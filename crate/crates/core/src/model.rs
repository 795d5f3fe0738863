//! Problem instances, parameter records, and solver run traces.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::SplitMix64;

/// Relative tolerance of the power iteration that caches the spectral norm.
const POWER_ITERATION_TOL: f64 = 1e-10;
const POWER_ITERATION_MAX: usize = 5000;

/// An underdetermined recovery problem: dense `m x n` matrix (m <= n) with an
/// `m`-vector of observations and the cached squared spectral norm.
///
/// Immutable after construction; safe to share across concurrent solver runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    rows: usize,
    cols: usize,
    /// Row-major matrix entries, length `rows * cols`.
    data: Vec<f64>,
    observation: Vec<f64>,
    spectral_norm_sq: f64,
}

impl ProblemInstance {
    /// Builds an instance from row-major entries, validating shapes and
    /// finiteness, and caches `||A||_2^2` via power iteration on `A^T A`.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>, observation: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("matrix dimensions must be positive"));
        }
        if rows > cols {
            return Err(Error::DimensionMismatch {
                what: "underdetermined matrix (m <= n required)",
                expected: cols,
                actual: rows,
            });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix entries",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if observation.len() != rows {
            return Err(Error::DimensionMismatch {
                what: "observation vector",
                expected: rows,
                actual: observation.len(),
            });
        }
        if !linalg::all_finite(&data) {
            return Err(Error::NonFiniteInput("matrix entries"));
        }
        if !linalg::all_finite(&observation) {
            return Err(Error::NonFiniteInput("observation vector"));
        }
        if data.iter().all(|&x| x == 0.0) {
            return Err(Error::DegenerateMatrix);
        }
        let spectral_norm_sq = largest_eigenvalue_of_gram(rows, cols, &data);
        Ok(Self {
            rows,
            cols,
            data,
            observation,
            spectral_norm_sq,
        })
    }

    /// Convenience constructor from a slice of rows.
    pub fn from_rows(rows: &[Vec<f64>], observation: &[f64]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(m * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "matrix row",
                    expected: n,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(m, n, data, observation.to_vec())
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

    pub fn matrix_data(&self) -> &[f64] {
        &self.data
    }

    pub fn observation(&self) -> &[f64] {
        &self.observation
    }

    /// Cached `||A||_2^2`, the largest eigenvalue of `A^T A`.
    pub fn spectral_norm_sq(&self) -> f64 {
        self.spectral_norm_sq
    }

    /// The default step size `0.99 * ||A||_2^{-2}`.
    pub fn default_mu(&self) -> Result<f64> {
        if self.spectral_norm_sq <= 0.0 {
            return Err(Error::DegenerateMatrix);
        }
        Ok(0.99 / self.spectral_norm_sq)
    }

    /// `out = A x`.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (yi, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *yi = linalg::dot(row, x);
        }
    }

    /// `out = A^T w`, accumulated row by row.
    pub fn apply_transpose_into(&self, w: &[f64], out: &mut [f64]) {
        debug_assert_eq!(w.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for (&wi, row) in w.iter().zip(self.data.chunks_exact(self.cols)) {
            if wi != 0.0 {
                for (o, &aij) in out.iter_mut().zip(row) {
                    *o += wi * aij;
                }
            }
        }
    }

    /// `out = b - A x`, the residual at `x`.
    pub fn residual_into(&self, x: &[f64], out: &mut [f64]) {
        self.apply_into(x, out);
        for (o, &bi) in out.iter_mut().zip(&self.observation) {
            *o = bi - *o;
        }
    }
}

/// Power iteration on the Gram matrix `A^T A`, started from the normalized
/// all-ones vector. If the start vector happens to be orthogonal to the row
/// space the iteration restarts from a fixed pseudorandom direction.
fn largest_eigenvalue_of_gram(rows: usize, cols: usize, data: &[f64]) -> f64 {
    let inv_sqrt_n = 1.0 / crate::float::sqrt(cols as f64);
    let mut v = vec![inv_sqrt_n; cols];
    let mut av = vec![0.0; rows];
    let mut w = vec![0.0; cols];
    let mut rayleigh = 0.0;
    let mut previous = f64::INFINITY;
    let mut stable_hits = 0;
    let mut restarts = 0;

    for _ in 0..POWER_ITERATION_MAX {
        // av = A v; w = A^T av
        for (yi, row) in av.iter_mut().zip(data.chunks_exact(cols)) {
            *yi = linalg::dot(row, &v);
        }
        w.fill(0.0);
        for (&wi, row) in av.iter().zip(data.chunks_exact(cols)) {
            if wi != 0.0 {
                for (o, &aij) in w.iter_mut().zip(row) {
                    *o += wi * aij;
                }
            }
        }
        rayleigh = linalg::dot(&v, &w);
        let wn = linalg::norm(&w);
        if wn == 0.0 {
            // v is orthogonal to the row space; re-seed deterministically.
            if restarts >= 3 {
                return 0.0;
            }
            restarts += 1;
            let mut rng = SplitMix64::new(0x5EED + restarts as u64);
            for vi in v.iter_mut() {
                *vi = rng.next_f64() - 0.5;
            }
            let n = linalg::norm(&v);
            for vi in v.iter_mut() {
                *vi /= n;
            }
            previous = f64::INFINITY;
            stable_hits = 0;
            continue;
        }
        for (vi, &wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
        if (rayleigh - previous).abs() <= POWER_ITERATION_TOL * rayleigh.max(f64::MIN_POSITIVE) {
            stable_hits += 1;
            if stable_hits >= 2 {
                break;
            }
        } else {
            stable_hits = 0;
        }
        previous = rayleigh;
    }
    rayleigh
}

/// The `(lambda, a, mu)` triple governing the penalty and thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionPenaltyParams {
    pub lambda: f64,
    pub a: f64,
    pub mu: f64,
}

impl FractionPenaltyParams {
    pub fn new(lambda: f64, a: f64, mu: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter("lambda must be positive and finite"));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter("a must be positive and finite"));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter("mu must be positive and finite"));
        }
        Ok(Self { lambda, a, mu })
    }

    /// Checks `mu <= ||A||_2^{-2}` against a concrete instance.
    pub fn validate_step_size(&self, p: &ProblemInstance) -> Result<()> {
        let limit = 1.0 / p.spectral_norm_sq();
        if self.mu > limit {
            return Err(Error::StepSizeOutOfRange { mu: self.mu, limit });
        }
        Ok(())
    }
}

/// Iteration stopping rule: relative change of the iterate or a cap on steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    /// Threshold on `||x_{k+1} - x_k||_2 / max(||x_k||_2, 1)`.
    pub rel_change_tol: f64,
    pub max_iters: usize,
}

impl StoppingRule {
    pub fn new(rel_change_tol: f64, max_iters: usize) -> Result<Self> {
        if !(rel_change_tol >= 0.0 && rel_change_tol.is_finite()) {
            return Err(Error::InvalidParameter("rel_change_tol must be >= 0 and finite"));
        }
        if max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1"));
        }
        Ok(Self {
            rel_change_tol,
            max_iters,
        })
    }

    /// The protocol used in the recovery experiments: tol 1e-15, 3000 steps.
    pub fn experiment_default() -> Self {
        Self {
            rel_change_tol: 1e-15,
            max_iters: 3000,
        }
    }
}

/// Why a solver run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum StopReason {
    Converged,
    MaxIters,
}

/// Full trace of one solver execution.
///
/// `objective_trace[k]` holds the regularized objective at `x_{k+1}` evaluated
/// with the parameters used in step `k`; `step_trace[k]` is
/// `||x_{k+1} - x_k||_2`; `param_trace[k]` is the `(lambda_k, a_k)` pair
/// (constant for Scheme-1 solvers, `(lambda, 0)` for the ISTA baseline).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SolverRun {
    pub final_iterate: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub step_trace: Vec<f64>,
    pub param_trace: Vec<(f64, f64)>,
    pub stop_reason: StopReason,
    pub iterations: usize,
    /// Objective at the step's starting iterate, evaluated with that step's
    /// parameters. Each step descends relative to it:
    /// `objective_trace[k] <= pre_step_objective_trace[k]` up to rounding.
    /// For fixed-parameter solvers this equals `objective_trace[k-1]`.
    /// Diagnostic only; not part of the serialized schema.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub pre_step_objective_trace: Vec<f64>,
    /// For adaptive solvers: the r-th and (r+1)-th largest magnitudes of the
    /// gradient-step vector at each iteration, in that order. Diagnostic only;
    /// not part of the serialized schema.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub adaptive_magnitudes_trace: Vec<(f64, f64)>,
}
