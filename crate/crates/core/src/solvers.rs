//! Iterative thresholding solvers for the regularized recovery problem.
//!
//! All solvers share the same two-phase iteration: a gradient step
//! `B_mu(x) = x + mu * A^T (b - A x)` on the data-fidelity term followed by a
//! componentwise thresholding step. They differ in how the thresholding
//! parameters are chosen:
//!
//! * [`run_ifpta_s1`] — fixed `(lambda, a)`, two-branch threshold.
//! * [`run_ifpta_s2`] — `lambda` re-selected each iteration from the sorted
//!   magnitudes of the gradient step; `a` fixed.
//! * [`run_cifpta_s1`] — fixed `(lambda, a)` restricted to the strictly
//!   convex regime `a <= 1/sqrt(lambda * mu)`, single threshold.
//! * [`run_cifpta_s2`] — both `lambda` and `a` re-selected each iteration,
//!   staying inside the convex regime by construction.
//! * [`run_ista_soft`] — an l1 soft-thresholding baseline with the same
//!   trace and stopping contract.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::float;
use crate::linalg;
use crate::model::{
    FractionPenaltyParams, ProblemInstance, SolverRun, StopReason, StoppingRule,
};
use crate::penalty::penalty_sum_unchecked;
use crate::prox::shrink_value;
use crate::rng::SplitMix64;

/// One gradient step on the data-fidelity term: `z + mu * A^T (b - A z)`.
pub fn gradient_step(p: &ProblemInstance, z: &[f64], mu: f64) -> Result<Vec<f64>> {
    if z.len() != p.cols() {
        return Err(Error::DimensionMismatch {
            what: "gradient-step input",
            expected: p.cols(),
            actual: z.len(),
        });
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter("mu must be positive and finite"));
    }
    let mut residual = vec![0.0; p.rows()];
    let mut out = vec![0.0; p.cols()];
    p.residual_into(z, &mut residual);
    p.apply_transpose_into(&residual, &mut out);
    for (o, &zi) in out.iter_mut().zip(z) {
        *o = zi + mu * *o;
    }
    Ok(out)
}

/// Magnitudes of `x` sorted in nonincreasing order.
pub fn nonincreasing_rearrangement(x: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = x.iter().map(|&t| float::abs(t)).collect();
    v.sort_unstable_by(|p, q| q.total_cmp(p));
    v
}

/// Upper end of the suggested fixed-`lambda` range for IFPTA-S1:
/// `||b||^2 + [||A^T b||_inf + sqrt(||A^T b||_inf + 2a ||b||^2 ||A^T b||_inf)] / a`.
pub fn lambda_upper_bound(p: &ProblemInstance, a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter("a must be positive and finite"));
    }
    let b_norm_sq = linalg::norm_sq(p.observation());
    if b_norm_sq == 0.0 {
        return Err(Error::DegenerateObservation);
    }
    let mut atb = vec![0.0; p.cols()];
    p.apply_transpose_into(p.observation(), &mut atb);
    let atb_inf = linalg::inf_norm(&atb);
    Ok(b_norm_sq + (atb_inf + float::sqrt(atb_inf + 2.0 * a * b_norm_sq * atb_inf)) / a)
}

/// Adaptive configuration for IFPTA-S2: fixed shape `a`, safety factor
/// `epsilon`, and the assumed sparsity `r` (the rule reads the r-th and
/// (r+1)-th largest magnitudes).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AdaptiveIfptaConfig {
    pub a: f64,
    pub epsilon: f64,
    pub sparsity_r: usize,
}

impl AdaptiveIfptaConfig {
    pub fn new(a: f64, epsilon: f64, sparsity_r: usize) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter("a must be positive and finite"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter("epsilon must lie in (0, 1)"));
        }
        if sparsity_r == 0 {
            return Err(Error::InvalidParameter("sparsity_r must be >= 1"));
        }
        Ok(Self {
            a,
            epsilon,
            sparsity_r,
        })
    }
}

/// Which branch the adaptive IFPTA rule selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IfptaBranch {
    /// `lambda_1 <= 1/(a^2 mu)`: threshold `lambda * mu * a / 2`.
    Branch1,
    /// otherwise `lambda_2`: threshold `sqrt(lambda * mu) - 1/(2a)`.
    Branch2,
}

#[inline]
fn ifpta_lambda_from_pair(
    v_r: f64,
    v_r1: f64,
    a: f64,
    epsilon: f64,
    mu: f64,
) -> (f64, IfptaBranch) {
    let lambda1 = 2.0 * v_r1 / (a * mu);
    if lambda1 <= 1.0 / (a * a * mu) {
        (lambda1, IfptaBranch::Branch1)
    } else {
        let s = 2.0 * a * v_r + 1.0;
        let lambda2 = (1.0 - epsilon) * s * s / (4.0 * a * a * mu);
        (lambda2, IfptaBranch::Branch2)
    }
}

/// Selects the regularization weight for one IFPTA-S2 iteration from the
/// gradient-step vector `bx`.
pub fn ifpta_adaptive_lambda(
    bx: &[f64],
    cfg: &AdaptiveIfptaConfig,
    mu: f64,
) -> Result<(f64, IfptaBranch)> {
    check_sparsity(cfg.sparsity_r, bx.len())?;
    let v = nonincreasing_rearrangement(bx);
    Ok(ifpta_lambda_from_pair(
        v[cfg.sparsity_r - 1],
        v[cfg.sparsity_r],
        cfg.a,
        cfg.epsilon,
        mu,
    ))
}

/// Adaptive configuration for CIFPTA-S2.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AdaptiveCifptaConfig {
    /// Convexity margin `tau` in (0, 1]; the selected pair always satisfies
    /// `a_k * sqrt(lambda_k * mu) = tau`.
    pub tau: f64,
    /// Cap `zeta` on the offset above the lower interval end.
    pub zeta: f64,
    /// Fraction `c` in [0, 1) of the interval width used as the offset.
    pub c: f64,
    /// Inclusive integer range for the fallback shape parameter when
    /// `lambda_k = 0`.
    pub a_hat_lo: u32,
    pub a_hat_hi: u32,
    pub sparsity_r: usize,
    /// Seeds the fallback draw stream so reruns are bit-reproducible.
    pub rng_seed: u64,
}

impl AdaptiveCifptaConfig {
    pub fn new(
        tau: f64,
        zeta: f64,
        c: f64,
        a_hat_range: (u32, u32),
        sparsity_r: usize,
        rng_seed: u64,
    ) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidParameter("tau must lie in (0, 1]"));
        }
        if !(zeta > 0.0 && zeta.is_finite()) {
            return Err(Error::InvalidParameter("zeta must be positive and finite"));
        }
        if !(0.0..1.0).contains(&c) {
            return Err(Error::InvalidParameter("c must lie in [0, 1)"));
        }
        if a_hat_range.0 == 0 || a_hat_range.0 > a_hat_range.1 {
            return Err(Error::InvalidParameter("a_hat range must satisfy 1 <= lo <= hi"));
        }
        if sparsity_r == 0 {
            return Err(Error::InvalidParameter("sparsity_r must be >= 1"));
        }
        Ok(Self {
            tau,
            zeta,
            c,
            a_hat_lo: a_hat_range.0,
            a_hat_hi: a_hat_range.1,
            sparsity_r,
            rng_seed,
        })
    }

    /// The settings used throughout the recovery experiments:
    /// `tau = 0.5`, `zeta = 1e-4`, `c = 0.5`, fallback integers 1..=100.
    pub fn with_defaults(sparsity_r: usize, rng_seed: u64) -> Result<Self> {
        Self::new(0.5, 1e-4, 0.5, (1, 100), sparsity_r, rng_seed)
    }
}

#[inline]
fn cifpta_params_from_pair(
    v_r: f64,
    v_r1: f64,
    cfg: &AdaptiveCifptaConfig,
    mu: f64,
    rng: &mut SplitMix64,
) -> (f64, f64) {
    let tau_sq_mu = cfg.tau * cfg.tau * mu;
    let lower = 4.0 * v_r1 * v_r1 / tau_sq_mu;
    let upper = 4.0 * v_r * v_r / tau_sq_mu;
    let lambda = lower + cfg.zeta.min(cfg.c * (upper - lower));
    if lambda == 0.0 {
        let span = (cfg.a_hat_hi - cfg.a_hat_lo) as u64 + 1;
        let a_hat = cfg.a_hat_lo as u64 + rng.next_below(span);
        (0.0, a_hat as f64)
    } else {
        (lambda, cfg.tau / float::sqrt(lambda * mu))
    }
}

/// Selects `(lambda_k, a_k)` for one CIFPTA-S2 iteration from the
/// gradient-step vector `bx`. When the selected weight is zero the shape
/// parameter is drawn uniformly from the configured integer range.
pub fn cifpta_adaptive_params(
    bx: &[f64],
    cfg: &AdaptiveCifptaConfig,
    mu: f64,
    rng: &mut SplitMix64,
) -> Result<(f64, f64)> {
    check_sparsity(cfg.sparsity_r, bx.len())?;
    let v = nonincreasing_rearrangement(bx);
    Ok(cifpta_params_from_pair(
        v[cfg.sparsity_r - 1],
        v[cfg.sparsity_r],
        cfg,
        mu,
        rng,
    ))
}

fn check_sparsity(r: usize, n: usize) -> Result<()> {
    if r == 0 || r + 1 > n {
        return Err(Error::SparsityOutOfRange { r, n });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Iteration engine
// ---------------------------------------------------------------------------

struct StepOutcome {
    lambda: f64,
    a: f64,
    /// (r-th, (r+1)-th) largest magnitudes seen by adaptive rules.
    pair: Option<(f64, f64)>,
}

trait StepRule {
    /// Computes the next iterate from the gradient-step vector.
    fn apply(&mut self, bx: &[f64], out: &mut [f64]) -> StepOutcome;
    /// Penalty part of the traced objective for this step's parameters.
    fn penalty_term(&self, x: &[f64], outcome: &StepOutcome) -> f64;
}

fn validate_step_size_open(p: &ProblemInstance, mu: f64) -> Result<()> {
    let limit = 1.0 / p.spectral_norm_sq();
    if !(mu > 0.0 && mu * p.spectral_norm_sq() < 1.0) {
        return Err(Error::StepSizeOutOfRange { mu, limit });
    }
    Ok(())
}

fn run_thresholding<R: StepRule>(
    p: &ProblemInstance,
    x0: &[f64],
    mu: f64,
    stop: &StoppingRule,
    rule: &mut R,
) -> Result<SolverRun> {
    if x0.len() != p.cols() {
        return Err(Error::DimensionMismatch {
            what: "initial iterate",
            expected: p.cols(),
            actual: x0.len(),
        });
    }
    if !linalg::all_finite(x0) {
        return Err(Error::NonFiniteInput("initial iterate"));
    }
    validate_step_size_open(p, mu)?;

    let n = p.cols();
    let cap = stop.max_iters.min(4096);
    let mut objective_trace = Vec::with_capacity(cap);
    let mut pre_step_trace = Vec::with_capacity(cap);
    let mut step_trace = Vec::with_capacity(cap);
    let mut param_trace = Vec::with_capacity(cap);
    let mut magnitudes = Vec::new();

    let mut x = x0.to_vec();
    let mut x_next = vec![0.0; n];
    let mut bx = vec![0.0; n];
    let mut residual = vec![0.0; p.rows()];
    p.residual_into(&x, &mut residual);
    let mut residual_sq_at_x = linalg::norm_sq(&residual);

    let mut stop_reason = StopReason::MaxIters;
    let mut iterations = 0;
    for k in 0..stop.max_iters {
        p.apply_transpose_into(&residual, &mut bx);
        for (bi, &xi) in bx.iter_mut().zip(&x) {
            *bi = xi + mu * *bi;
        }
        let outcome = rule.apply(&bx, &mut x_next);
        if !linalg::all_finite(&x_next) {
            return Err(Error::NonFiniteIterate { iteration: k });
        }
        let pre_step = residual_sq_at_x + rule.penalty_term(&x, &outcome);
        p.residual_into(&x_next, &mut residual);
        residual_sq_at_x = linalg::norm_sq(&residual);
        let objective = residual_sq_at_x + rule.penalty_term(&x_next, &outcome);
        let step = linalg::distance(&x, &x_next);
        objective_trace.push(objective);
        pre_step_trace.push(pre_step);
        step_trace.push(step);
        param_trace.push((outcome.lambda, outcome.a));
        if let Some(pair) = outcome.pair {
            magnitudes.push(pair);
        }
        let denom = linalg::norm(&x).max(1.0);
        core::mem::swap(&mut x, &mut x_next);
        iterations = k + 1;
        if step <= stop.rel_change_tol * denom {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    Ok(SolverRun {
        final_iterate: x,
        objective_trace,
        step_trace,
        param_trace,
        stop_reason,
        iterations,
        pre_step_objective_trace: pre_step_trace,
        adaptive_magnitudes_trace: magnitudes,
    })
}

struct FixedFractionRule {
    lambda: f64,
    a: f64,
    /// effective regularization `lambda * mu`
    lam_eff: f64,
    threshold: f64,
}

impl StepRule for FixedFractionRule {
    fn apply(&mut self, bx: &[f64], out: &mut [f64]) -> StepOutcome {
        for (o, &g) in out.iter_mut().zip(bx) {
            *o = if float::abs(g) > self.threshold {
                shrink_value(g, self.lam_eff, self.a)
            } else {
                0.0
            };
        }
        StepOutcome {
            lambda: self.lambda,
            a: self.a,
            pair: None,
        }
    }

    fn penalty_term(&self, x: &[f64], _outcome: &StepOutcome) -> f64 {
        self.lambda * penalty_sum_unchecked(x, self.a)
    }
}

struct AdaptiveIfptaRule {
    cfg: AdaptiveIfptaConfig,
    mu: f64,
    sorted: Vec<f64>,
    zero_lambda_steps: usize,
}

impl StepRule for AdaptiveIfptaRule {
    fn apply(&mut self, bx: &[f64], out: &mut [f64]) -> StepOutcome {
        self.sorted.clear();
        self.sorted.extend(bx.iter().map(|&t| float::abs(t)));
        self.sorted.sort_unstable_by(|p, q| q.total_cmp(p));
        let v_r = self.sorted[self.cfg.sparsity_r - 1];
        let v_r1 = self.sorted[self.cfg.sparsity_r];
        let (lambda, branch) =
            ifpta_lambda_from_pair(v_r, v_r1, self.cfg.a, self.cfg.epsilon, self.mu);
        if lambda == 0.0 {
            // lambda_1 = 0 means a zero threshold and an identity prox
            out.copy_from_slice(bx);
            self.zero_lambda_steps += 1;
        } else {
            let threshold = match branch {
                // lambda_1 * mu * a / 2 reduces to v_r1 exactly
                IfptaBranch::Branch1 => v_r1,
                IfptaBranch::Branch2 => {
                    float::sqrt(lambda * self.mu) - 1.0 / (2.0 * self.cfg.a)
                }
            };
            let lam_eff = lambda * self.mu;
            for (o, &g) in out.iter_mut().zip(bx) {
                *o = if float::abs(g) > threshold {
                    shrink_value(g, lam_eff, self.cfg.a)
                } else {
                    0.0
                };
            }
        }
        StepOutcome {
            lambda,
            a: self.cfg.a,
            pair: Some((v_r, v_r1)),
        }
    }

    fn penalty_term(&self, x: &[f64], outcome: &StepOutcome) -> f64 {
        if outcome.lambda == 0.0 {
            0.0
        } else {
            outcome.lambda * penalty_sum_unchecked(x, self.cfg.a)
        }
    }
}

struct AdaptiveCifptaRule {
    cfg: AdaptiveCifptaConfig,
    mu: f64,
    rng: SplitMix64,
    sorted: Vec<f64>,
    zero_lambda_steps: usize,
}

impl StepRule for AdaptiveCifptaRule {
    fn apply(&mut self, bx: &[f64], out: &mut [f64]) -> StepOutcome {
        self.sorted.clear();
        self.sorted.extend(bx.iter().map(|&t| float::abs(t)));
        self.sorted.sort_unstable_by(|p, q| q.total_cmp(p));
        let v_r = self.sorted[self.cfg.sparsity_r - 1];
        let v_r1 = self.sorted[self.cfg.sparsity_r];
        let (lambda, a) = cifpta_params_from_pair(v_r, v_r1, &self.cfg, self.mu, &mut self.rng);
        if lambda == 0.0 {
            // zero threshold, identity prox; `a` is only recorded
            out.copy_from_slice(bx);
            self.zero_lambda_steps += 1;
        } else {
            let threshold = self.cfg.tau * float::sqrt(lambda * self.mu) / 2.0;
            let lam_eff = lambda * self.mu;
            for (o, &g) in out.iter_mut().zip(bx) {
                *o = if float::abs(g) > threshold {
                    shrink_value(g, lam_eff, a)
                } else {
                    0.0
                };
            }
        }
        StepOutcome {
            lambda,
            a,
            pair: Some((v_r, v_r1)),
        }
    }

    fn penalty_term(&self, x: &[f64], outcome: &StepOutcome) -> f64 {
        if outcome.lambda == 0.0 {
            0.0
        } else {
            outcome.lambda * penalty_sum_unchecked(x, outcome.a)
        }
    }
}

struct SoftThresholdRule {
    lambda: f64,
    threshold: f64,
}

impl StepRule for SoftThresholdRule {
    fn apply(&mut self, bx: &[f64], out: &mut [f64]) -> StepOutcome {
        let t = self.threshold;
        for (o, &g) in out.iter_mut().zip(bx) {
            *o = if g > t {
                g - t
            } else if g < -t {
                g + t
            } else {
                0.0
            };
        }
        StepOutcome {
            lambda: self.lambda,
            a: 0.0,
            pair: None,
        }
    }

    fn penalty_term(&self, x: &[f64], _outcome: &StepOutcome) -> f64 {
        self.lambda * x.iter().map(|&t| float::abs(t)).sum::<f64>()
    }
}

// ---------------------------------------------------------------------------
// Public solver entry points
// ---------------------------------------------------------------------------

/// Fixed-parameter iterative thresholding with the two-branch threshold.
///
/// The suggested `lambda` range `(||b||^2, lambda_upper_bound)` is checked and
/// logged as a warning only; any positive `lambda` runs.
pub fn run_ifpta_s1(
    p: &ProblemInstance,
    x0: &[f64],
    params: &FractionPenaltyParams,
    stop: &StoppingRule,
) -> Result<SolverRun> {
    let regime = crate::prox::threshold(params.lambda * params.mu, params.a)?;
    let b_norm_sq = linalg::norm_sq(p.observation());
    if b_norm_sq > 0.0 {
        if let Ok(bar) = lambda_upper_bound(p, params.a) {
            if !(params.lambda > b_norm_sq && params.lambda < bar) {
                log::warn!(
                    "IFPTA-S1 lambda {} outside the suggested range ({b_norm_sq}, {bar})",
                    params.lambda
                );
            }
        }
    }
    let mut rule = FixedFractionRule {
        lambda: params.lambda,
        a: params.a,
        lam_eff: params.lambda * params.mu,
        threshold: regime.t_value,
    };
    run_thresholding(p, x0, params.mu, stop, &mut rule)
}

/// Adaptive-`lambda` iterative thresholding (fixed `a`).
pub fn run_ifpta_s2(
    p: &ProblemInstance,
    x0: &[f64],
    cfg: &AdaptiveIfptaConfig,
    mu: f64,
    stop: &StoppingRule,
) -> Result<SolverRun> {
    check_sparsity(cfg.sparsity_r, p.cols())?;
    let mut rule = AdaptiveIfptaRule {
        cfg: *cfg,
        mu,
        sorted: Vec::with_capacity(p.cols()),
        zero_lambda_steps: 0,
    };
    let run = run_thresholding(p, x0, mu, stop, &mut rule)?;
    if rule.zero_lambda_steps > 0 {
        log::debug!(
            "IFPTA-S2 took {} identity steps (selected lambda was zero)",
            rule.zero_lambda_steps
        );
    }
    Ok(run)
}

/// Fixed-parameter convex-regime iterative thresholding. Requires
/// `a <= 1/sqrt(lambda * mu)`; the threshold is `lambda * mu * a / 2`.
pub fn run_cifpta_s1(
    p: &ProblemInstance,
    x0: &[f64],
    params: &FractionPenaltyParams,
    stop: &StoppingRule,
) -> Result<SolverRun> {
    let bound = 1.0 / float::sqrt(params.lambda * params.mu);
    if params.a > bound * (1.0 + 1e-12) {
        return Err(Error::ConvexityViolated { a: params.a, bound });
    }
    let mut rule = FixedFractionRule {
        lambda: params.lambda,
        a: params.a,
        lam_eff: params.lambda * params.mu,
        threshold: params.lambda * params.mu * params.a / 2.0,
    };
    run_thresholding(p, x0, params.mu, stop, &mut rule)
}

/// Fully adaptive convex-regime iterative thresholding: each iteration
/// re-selects `(lambda_k, a_k)` with `a_k * sqrt(lambda_k * mu) = tau`, so the
/// per-coordinate objective stays strictly convex.
pub fn run_cifpta_s2(
    p: &ProblemInstance,
    x0: &[f64],
    cfg: &AdaptiveCifptaConfig,
    mu: f64,
    stop: &StoppingRule,
) -> Result<SolverRun> {
    check_sparsity(cfg.sparsity_r, p.cols())?;
    let mut rule = AdaptiveCifptaRule {
        cfg: *cfg,
        mu,
        rng: SplitMix64::new(cfg.rng_seed),
        sorted: Vec::with_capacity(p.cols()),
        zero_lambda_steps: 0,
    };
    let run = run_thresholding(p, x0, mu, stop, &mut rule)?;
    if rule.zero_lambda_steps > 0 {
        log::debug!(
            "CIFPTA-S2 took {} identity steps (selected lambda was zero)",
            rule.zero_lambda_steps
        );
    }
    Ok(run)
}

/// Soft-thresholding ISTA baseline for `||Ax - b||^2 + lambda * ||x||_1`.
/// `lambda = 0` degenerates to plain gradient iteration.
pub fn run_ista_soft(
    p: &ProblemInstance,
    x0: &[f64],
    lambda: f64,
    mu: f64,
    stop: &StoppingRule,
) -> Result<SolverRun> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter("lambda must be >= 0 and finite"));
    }
    let mut rule = SoftThresholdRule {
        lambda,
        threshold: lambda * mu / 2.0,
    };
    run_thresholding(p, x0, mu, stop, &mut rule)
}
