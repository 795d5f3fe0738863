//! Closed-form scalar minimizer of the thresholded 1-D objective, the vector
//! thresholding operator built from it, and a brute-force oracle.
//!
//! For `f(beta) = (beta - gamma)^2 + lambda * rho_a(beta)` the minimizer is
//! zero when `|gamma|` is at or below a threshold `t`, and otherwise a
//! shrunken value obtained from the trigonometric solution of the stationarity
//! cubic. All formulas take a plain `lambda`; composition with a step size
//! substitutes `lambda * mu` (see [`apply_prox`]).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::float;
use crate::penalty::{scalar_objective_unchecked, ScalarObjectiveSpec};

/// Rounding guard on the arccos argument; larger excursions above 1 signal
/// that the input was below the threshold.
const ARCCOS_GUARD: f64 = 1e-9;

/// Relative slack on the convexity bound `a <= 1/sqrt(lambda)`.
const CONVEXITY_SLACK: f64 = 1e-12;

/// Which branch of the threshold formula applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdKind {
    /// `lambda <= 1/a^2`: threshold `lambda * a / 2` (boundary included).
    SmallLambda,
    /// `lambda > 1/a^2`: threshold `sqrt(lambda) - 1/(2a)`.
    LargeLambda,
}

/// The threshold value together with the branch it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRegime {
    pub kind: ThresholdKind,
    pub t_value: f64,
}

/// Threshold of the scalar minimizer for the given `(lambda, a)`.
pub fn threshold(lambda: f64, a: f64) -> Result<ThresholdRegime> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter("lambda must be positive and finite"));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter("a must be positive and finite"));
    }
    Ok(if lambda <= 1.0 / (a * a) {
        ThresholdRegime {
            kind: ThresholdKind::SmallLambda,
            t_value: lambda * a / 2.0,
        }
    } else {
        ThresholdRegime {
            kind: ThresholdKind::LargeLambda,
            t_value: float::sqrt(lambda) - 1.0 / (2.0 * a),
        }
    })
}

#[inline]
fn arccos_argument(abs_gamma: f64, lambda: f64, a: f64) -> f64 {
    let one_plus = 1.0 + a * abs_gamma;
    27.0 * lambda * a * a / (4.0 * one_plus * one_plus * one_plus) - 1.0
}

/// The angle `arccos(27*lambda*a^2 / (4(1+a|gamma|)^3) - 1)` entering the
/// closed-form shrinkage. Defined for `|gamma|` above the threshold; the
/// argument is clamped to `[-1, 1]` inside a small rounding guard.
pub fn shrink_angle(gamma: f64, lambda: f64, a: f64) -> Result<f64> {
    if !gamma.is_finite() {
        return Err(Error::NonFiniteInput("gamma"));
    }
    let arg = arccos_argument(float::abs(gamma), lambda, a);
    if arg > 1.0 + ARCCOS_GUARD {
        return Err(Error::ArccosDomainViolation { argument: arg });
    }
    Ok(float::acos(arg.clamp(-1.0, 1.0)))
}

/// Shrinkage kernel; assumes `|gamma|` is above the threshold so the arccos
/// argument is in range up to rounding.
#[inline]
pub(crate) fn shrink_value(gamma: f64, lambda: f64, a: f64) -> f64 {
    let abs_gamma = float::abs(gamma);
    let one_plus = 1.0 + a * abs_gamma;
    let arg = (27.0 * lambda * a * a / (4.0 * one_plus * one_plus * one_plus) - 1.0)
        .clamp(-1.0, 1.0);
    let angle = float::acos(arg);
    let cosine = float::cos(angle / 3.0 - core::f64::consts::FRAC_PI_3);
    let magnitude = (one_plus / 3.0 * (1.0 + 2.0 * cosine) - 1.0) / a;
    if gamma < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

/// The nonzero branch of the scalar minimizer. Requires `|gamma|` strictly
/// above the threshold; the result keeps the sign of `gamma` and is strictly
/// smaller in magnitude.
pub fn shrink(gamma: f64, lambda: f64, a: f64) -> Result<f64> {
    let t = threshold(lambda, a)?.t_value;
    if !gamma.is_finite() {
        return Err(Error::NonFiniteInput("gamma"));
    }
    if float::abs(gamma) <= t {
        return Err(Error::BelowThreshold { gamma, threshold: t });
    }
    Ok(shrink_value(gamma, lambda, a))
}

/// The scalar thresholding operator: the minimizer of
/// `(beta - gamma)^2 + lambda * rho_a(beta)` over all of `beta`.
///
/// Zero at or below the threshold (ties map to zero), shrunken otherwise.
/// `lambda` and `a` must be positive and finite.
pub fn scalar_prox(gamma: f64, lambda: f64, a: f64) -> f64 {
    debug_assert!(lambda > 0.0 && a > 0.0);
    let t = if lambda <= 1.0 / (a * a) {
        lambda * a / 2.0
    } else {
        float::sqrt(lambda) - 1.0 / (2.0 * a)
    };
    if float::abs(gamma) > t {
        shrink_value(gamma, lambda, a)
    } else {
        0.0
    }
}

/// The scalar thresholding operator restricted to the strictly convex regime
/// `a <= 1/sqrt(lambda)`, where the threshold is always `lambda * a / 2` and
/// the result is the unique global minimizer.
pub fn scalar_prox_convex(gamma: f64, lambda: f64, a: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter("lambda must be positive and finite"));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter("a must be positive and finite"));
    }
    let bound = 1.0 / float::sqrt(lambda);
    if a > bound * (1.0 + CONVEXITY_SLACK) {
        return Err(Error::ConvexityViolated { a, bound });
    }
    let t = lambda * a / 2.0;
    Ok(if float::abs(gamma) > t {
        shrink_value(gamma, lambda, a)
    } else {
        0.0
    })
}

/// Componentwise thresholding operator with the step-size substitution
/// `lambda -> lambda * mu`. Preserves zeros and permutation structure.
pub fn apply_prox(v: &[f64], lambda: f64, mu: f64, a: f64) -> Vec<f64> {
    let lam = lambda * mu;
    v.iter().map(|&g| scalar_prox(g, lam, a)).collect()
}

/// Brute-force minimizer of the scalar objective: a 100k-point grid scan over
/// `[-(|gamma|+1), |gamma|+1]`, golden-section refinement of the best bracket
/// down to width 1e-10, and an explicit comparison against `beta = 0`.
///
/// Independent of the closed form; used to validate it.
pub fn prox_oracle_1d(spec: &ScalarObjectiveSpec) -> f64 {
    const GRID_POINTS: usize = 100_000;
    let half_width = float::abs(spec.gamma) + 1.0;
    let lo = -half_width;
    let step = 2.0 * half_width / (GRID_POINTS - 1) as f64;

    let mut best_i = 0usize;
    let mut best_f = f64::INFINITY;
    for i in 0..GRID_POINTS {
        let beta = lo + step * i as f64;
        let f = scalar_objective_unchecked(spec, beta);
        if f < best_f {
            best_f = f;
            best_i = i;
        }
    }

    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = lo + step * (best_i + 1).min(GRID_POINTS - 1) as f64;
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = scalar_objective_unchecked(spec, c);
    let mut fd = scalar_objective_unchecked(spec, d);
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = scalar_objective_unchecked(spec, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = scalar_objective_unchecked(spec, d);
        }
    }
    let refined = 0.5 * (a + b);
    let f_refined = scalar_objective_unchecked(spec, refined);
    let f_zero = scalar_objective_unchecked(spec, 0.0);
    if f_zero <= f_refined {
        0.0
    } else {
        refined
    }
}

/// Uniformly sampled `(beta, f(beta))` curve data for external plotting.
pub fn sample_objective_curve(
    spec: &ScalarObjectiveSpec,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Vec<(f64, f64)>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter("curve range must satisfy lo < hi"));
    }
    if points < 2 {
        return Err(Error::InvalidParameter("curve needs at least 2 points"));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            let beta = lo + step * i as f64;
            (beta, scalar_objective_unchecked(spec, beta))
        })
        .collect())
}
