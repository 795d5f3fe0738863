//! The fraction function, its penalty sum, the regularized objective, the
//! majorizing surrogate, and the scalar 1-D objective.

use alloc::vec;

use crate::error::{Error, Result};
use crate::float;
use crate::linalg;
use crate::model::ProblemInstance;

/// Parameters of the scalar objective `f(beta) = (beta - gamma)^2 + lambda * rho_a(beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarObjectiveSpec {
    pub gamma: f64,
    pub lambda: f64,
    pub a: f64,
}

impl ScalarObjectiveSpec {
    pub fn new(gamma: f64, lambda: f64, a: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::NonFiniteInput("gamma"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter("lambda must be positive and finite"));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter("a must be positive and finite"));
        }
        Ok(Self { gamma, lambda, a })
    }
}

#[inline]
pub(crate) fn fraction_unchecked(t: f64, a: f64) -> f64 {
    let at = a * float::abs(t);
    at / (at + 1.0)
}

/// The fraction function `rho_a(t) = a|t| / (a|t| + 1)`, even in `t`,
/// increasing in `|t|`, with values in `[0, 1)`.
pub fn fraction(t: f64, a: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::NonFiniteInput("t"));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter("a must be positive and finite"));
    }
    Ok(fraction_unchecked(t, a))
}

#[inline]
pub(crate) fn penalty_sum_unchecked(x: &[f64], a: f64) -> f64 {
    x.iter().map(|&t| fraction_unchecked(t, a)).sum()
}

/// The sparsity-promoting penalty `P_a(x) = sum_i rho_a(x_i)`; approaches the
/// number of nonzeros as `a` grows.
pub fn penalty_sum(x: &[f64], a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter("a must be positive and finite"));
    }
    if !linalg::all_finite(x) {
        return Err(Error::NonFiniteInput("x"));
    }
    Ok(penalty_sum_unchecked(x, a))
}

/// The regularized objective `C(x) = ||A x - b||_2^2 + lambda * P_a(x)`.
pub fn objective(p: &ProblemInstance, x: &[f64], lambda: f64, a: f64) -> Result<f64> {
    if x.len() != p.cols() {
        return Err(Error::DimensionMismatch {
            what: "objective argument",
            expected: p.cols(),
            actual: x.len(),
        });
    }
    if !(lambda > 0.0 && a > 0.0 && lambda.is_finite() && a.is_finite()) {
        return Err(Error::InvalidParameter("lambda and a must be positive and finite"));
    }
    let mut residual = vec![0.0; p.rows()];
    p.residual_into(x, &mut residual);
    Ok(linalg::norm_sq(&residual) + lambda * penalty_sum_unchecked(x, a))
}

/// The surrogate `mu * [C(x) - ||A x - A z||^2] + ||x - z||^2`, which
/// majorizes `mu * C(x)` whenever `mu <= ||A||_2^{-2}`.
pub fn surrogate(
    p: &ProblemInstance,
    x: &[f64],
    z: &[f64],
    lambda: f64,
    mu: f64,
    a: f64,
) -> Result<f64> {
    if z.len() != p.cols() {
        return Err(Error::DimensionMismatch {
            what: "surrogate anchor",
            expected: p.cols(),
            actual: z.len(),
        });
    }
    let limit = 1.0 / p.spectral_norm_sq();
    if !(mu > 0.0 && mu <= limit) {
        return Err(Error::StepSizeOutOfRange { mu, limit });
    }
    let c = objective(p, x, lambda, a)?;
    let mut ax = vec![0.0; p.rows()];
    let mut az = vec![0.0; p.rows()];
    p.apply_into(x, &mut ax);
    p.apply_into(z, &mut az);
    let coupling: f64 = ax.iter().zip(&az).map(|(u, v)| (u - v) * (u - v)).sum();
    let prox_dist: f64 = x.iter().zip(z).map(|(u, v)| (u - v) * (u - v)).sum();
    Ok(mu * (c - coupling) + prox_dist)
}

/// The scalar objective `f(beta) = (beta - gamma)^2 + lambda * rho_a(beta)`.
pub fn scalar_objective(spec: &ScalarObjectiveSpec, beta: f64) -> Result<f64> {
    if !beta.is_finite() {
        return Err(Error::NonFiniteInput("beta"));
    }
    Ok(scalar_objective_unchecked(spec, beta))
}

#[inline]
pub(crate) fn scalar_objective_unchecked(spec: &ScalarObjectiveSpec, beta: f64) -> f64 {
    let d = beta - spec.gamma;
    d * d + spec.lambda * fraction_unchecked(beta, spec.a)
}

/// Analytic derivative of the scalar objective away from the kink at zero:
/// `f'(beta) = 2(beta - gamma) + lambda * a * sign(beta) / (a|beta| + 1)^2`.
pub fn scalar_objective_derivative(spec: &ScalarObjectiveSpec, beta: f64) -> Result<f64> {
    if beta == 0.0 {
        return Err(Error::InvalidParameter("derivative undefined at beta = 0"));
    }
    if !beta.is_finite() {
        return Err(Error::NonFiniteInput("beta"));
    }
    let denom = spec.a * float::abs(beta) + 1.0;
    let sign = if beta < 0.0 { -1.0 } else { 1.0 };
    Ok(2.0 * (beta - spec.gamma) + spec.lambda * spec.a * sign / (denom * denom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn spec(gamma: f64, lambda: f64, a: f64) -> ScalarObjectiveSpec {
        ScalarObjectiveSpec::new(gamma, lambda, a).unwrap()
    }

    /// Pairwise (compensated) summation used as the test-side oracle.
    fn pairwise_sum(vals: &[f64]) -> f64 {
        match vals.len() {
            0 => 0.0,
            1 => vals[0],
            n => pairwise_sum(&vals[..n / 2]) + pairwise_sum(&vals[n / 2..]),
        }
    }

    fn random_instance(m: usize, n: usize, seed: u64) -> ProblemInstance {
        let mut rng = SplitMix64::new(seed);
        let mut data = alloc::vec![0.0; m * n];
        rng.fill_standard_normal(&mut data);
        let mut obs = alloc::vec![0.0; m];
        rng.fill_standard_normal(&mut obs);
        ProblemInstance::new(m, n, data, obs).unwrap()
    }

    #[test]
    fn fraction_examples() {
        assert_eq!(fraction(0.0, 3.0).unwrap(), 0.0);
        assert!((fraction(1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((fraction(-2.0, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(fraction(f64::NAN, 1.0).is_err());
        assert!(fraction(1.0, 0.0).is_err());
    }

    #[test]
    fn penalty_sum_examples() {
        assert_eq!(penalty_sum(&[0.0, 0.0, 0.0], 2.0).unwrap(), 0.0);
        assert!((penalty_sum(&[1.0, -1.0], 1.0).unwrap() - 1.0).abs() < 1e-15);
        // With huge a the penalty approaches the nonzero count.
        let p = penalty_sum(&[5.0, 0.0, -3.0], 1e6).unwrap();
        assert!((p - 2.0).abs() < 1e-5);
        assert!(penalty_sum(&[1.0, f64::NAN], 1.0).is_err());
    }

    #[test]
    fn objective_examples() {
        let p = random_instance(4, 8, 11);
        let zero = alloc::vec![0.0; 8];
        let at_zero = objective(&p, &zero, 0.3, 2.0).unwrap();
        let b_norm_sq: f64 = p.observation().iter().map(|b| b * b).sum();
        assert!((at_zero - b_norm_sq).abs() < 1e-12);
        assert!(objective(&p, &zero[..7], 0.3, 2.0).is_err());
    }

    #[test]
    fn objective_with_exact_data_equals_penalty() {
        // x with A x = b exactly: build b = A x first.
        let mut rng = SplitMix64::new(5);
        let m = 4;
        let n = 8;
        let mut data = alloc::vec![0.0; m * n];
        rng.fill_standard_normal(&mut data);
        let mut x = alloc::vec![0.0; n];
        rng.fill_standard_normal(&mut x);
        let mut b = alloc::vec![0.0; m];
        for i in 0..m {
            b[i] = data[i * n..(i + 1) * n]
                .iter()
                .zip(&x)
                .map(|(aij, xj)| aij * xj)
                .sum();
        }
        let p = ProblemInstance::new(m, n, data, b).unwrap();
        let c = objective(&p, &x, 1.0, 3.0).unwrap();
        let pen = penalty_sum(&x, 3.0).unwrap();
        assert!((c - pen).abs() < 1e-10, "residual should vanish: {c} vs {pen}");
    }

    #[test]
    fn objective_matches_term_by_term_oracle() {
        let p = random_instance(4, 8, 11);
        let mut rng = SplitMix64::new(12);
        let mut x = alloc::vec![0.0; 8];
        rng.fill_standard_normal(&mut x);
        let (lambda, a) = (0.3, 2.0);

        let mut terms: Vec<f64> = Vec::new();
        for i in 0..4 {
            let ri: f64 = p.row(i).iter().zip(&x).map(|(aij, xj)| aij * xj).sum::<f64>()
                - p.observation()[i];
            terms.push(ri * ri);
        }
        for &xi in &x {
            terms.push(lambda * (a * xi.abs()) / (a * xi.abs() + 1.0));
        }
        let oracle = pairwise_sum(&terms);
        let got = objective(&p, &x, lambda, a).unwrap();
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }

    #[test]
    fn surrogate_at_anchor_equals_mu_times_objective() {
        let p = random_instance(4, 8, 21);
        let mu = p.default_mu().unwrap();
        let mut rng = SplitMix64::new(22);
        let mut x = alloc::vec![0.0; 8];
        rng.fill_standard_normal(&mut x);
        let s = surrogate(&p, &x, &x, 0.7, mu, 1.5).unwrap();
        let c = objective(&p, &x, 0.7, 1.5).unwrap();
        assert_eq!(s, mu * c);
    }

    #[test]
    fn surrogate_majorizes_scaled_objective() {
        let p = random_instance(4, 8, 31);
        let mu = p.default_mu().unwrap();
        let mut rng = SplitMix64::new(32);
        let mut x = alloc::vec![0.0; 8];
        let mut z = alloc::vec![0.0; 8];
        for _ in 0..10_000 {
            rng.fill_standard_normal(&mut x);
            rng.fill_standard_normal(&mut z);
            let s = surrogate(&p, &x, &z, 0.7, mu, 1.5).unwrap();
            let c = objective(&p, &x, 0.7, 1.5).unwrap();
            assert!(s - mu * c >= -1e-12, "surrogate {s} < mu*C {}", mu * c);
        }
    }

    #[test]
    fn surrogate_matches_separable_form() {
        let p = random_instance(3, 6, 41);
        let mu = p.default_mu().unwrap();
        let (lambda, a) = (0.45, 1.2);
        let mut rng = SplitMix64::new(42);
        let mut x = alloc::vec![0.0; 6];
        let mut z = alloc::vec![0.0; 6];
        for _ in 0..50 {
            rng.fill_standard_normal(&mut x);
            rng.fill_standard_normal(&mut z);

            // separable form: sum_i (x_i - B(z)_i)^2 + lambda*mu*rho(x_i)
            //   + mu*||b||^2 + ||z||^2 - mu*||Az||^2 - ||B(z)||^2
            let mut az = alloc::vec![0.0; 3];
            p.apply_into(&z, &mut az);
            let mut res = alloc::vec![0.0; 3];
            p.residual_into(&z, &mut res);
            let mut bz = z.clone();
            let mut atr = alloc::vec![0.0; 6];
            p.apply_transpose_into(&res, &mut atr);
            for (bzi, &ai) in bz.iter_mut().zip(&atr) {
                *bzi += mu * ai;
            }
            let sep: f64 = x
                .iter()
                .zip(&bz)
                .map(|(xi, bi)| (xi - bi) * (xi - bi) + lambda * mu * (a * xi.abs()) / (a * xi.abs() + 1.0))
                .sum::<f64>()
                + mu * p.observation().iter().map(|b| b * b).sum::<f64>()
                + z.iter().map(|v| v * v).sum::<f64>()
                - mu * az.iter().map(|v| v * v).sum::<f64>()
                - bz.iter().map(|v| v * v).sum::<f64>();

            let s = surrogate(&p, &x, &z, lambda, mu, a).unwrap();
            assert!((s - sep).abs() < 1e-10, "{s} vs {sep}");
        }
    }

    #[test]
    fn surrogate_rejects_out_of_range_step() {
        let p = random_instance(4, 8, 51);
        let x = alloc::vec![0.0; 8];
        let limit = 1.0 / p.spectral_norm_sq();
        assert!(surrogate(&p, &x, &x, 1.0, limit, 1.0).is_ok());
        assert!(matches!(
            surrogate(&p, &x, &x, 1.0, limit * 1.01, 1.0),
            Err(Error::StepSizeOutOfRange { .. })
        ));
    }

    #[test]
    fn scalar_objective_examples() {
        assert_eq!(scalar_objective(&spec(0.0, 1.0, 1.0), 0.0).unwrap(), 0.0);
        // gamma=0, lambda=0.49, a=1.1 at beta=1: 1 + 0.49 * 1.1/2.1
        let f = scalar_objective(&spec(0.0, 0.49, 1.1), 1.0).unwrap();
        assert!((f - (1.0 + 0.49 * (1.1 / 2.1))).abs() < 1e-12);
        assert!((f - 1.256_666_666_666_666_7).abs() < 1e-12);
    }

    #[test]
    fn analytic_derivative_matches_finite_differences() {
        let mut rng = SplitMix64::new(61);
        for _ in 0..500 {
            let gamma = 8.0 * (rng.next_f64() - 0.5);
            let lambda = 5.0 * rng.next_f64() + 1e-3;
            let a = 10.0 * rng.next_f64() + 1e-3;
            let mut beta = 10.0 * (rng.next_f64() - 0.5);
            if beta.abs() < 0.01 {
                beta = 0.01_f64.copysign(beta + f64::MIN_POSITIVE);
            }
            let s = spec(gamma, lambda, a);
            let h = 1e-6 * (1.0 + beta.abs());
            let fd = (scalar_objective(&s, beta + h).unwrap()
                - scalar_objective(&s, beta - h).unwrap())
                / (2.0 * h);
            let exact = scalar_objective_derivative(&s, beta).unwrap();
            assert!((fd - exact).abs() < 1e-6, "fd {fd} vs exact {exact}");
        }
    }

    #[test]
    fn second_derivative_sign_in_and_out_of_convex_regime() {
        // a <= 1/sqrt(lambda): convex, so FD second derivative >= -1e-6.
        let mut rng = SplitMix64::new(62);
        for _ in 0..200 {
            let lambda = 5.0 * rng.next_f64() + 1e-3;
            let a = 1.0 / crate::float::sqrt(lambda);
            let s = spec(0.0, lambda, a);
            let beta = 0.01 + 10.0 * rng.next_f64();
            let h = (1e-4 * (beta + crate::float::sqrt(lambda))).min(beta / 2.0);
            let f2 = (scalar_objective(&s, beta + h).unwrap()
                - 2.0 * scalar_objective(&s, beta).unwrap()
                + scalar_objective(&s, beta - h).unwrap())
                / (h * h);
            assert!(f2 >= -1e-6, "lambda {lambda}: f'' {f2} at beta {beta}");
        }
        // The nonconvex parameters admit a negative second derivative.
        let s = spec(0.0, 0.49, 50.0);
        let beta = 0.01;
        let h = 1e-5;
        let f2 = (scalar_objective(&s, beta + h).unwrap()
            - 2.0 * scalar_objective(&s, beta).unwrap()
            + scalar_objective(&s, beta - h).unwrap())
            / (h * h);
        assert!(f2 < 0.0, "expected nonconvexity, got f'' = {f2}");
    }

    proptest! {
        #[test]
        fn fraction_is_even_bounded_and_monotone(
            t in -50.0f64..50.0,
            a in 1e-3f64..10.0,
            scale in 1.0f64..3.0,
        ) {
            let f = fraction_unchecked(t, a);
            prop_assert!((0.0..1.0).contains(&f));
            prop_assert_eq!(f, fraction_unchecked(-t, a));
            // nondecreasing in |t| and in a
            prop_assert!(fraction_unchecked(t * scale, a) >= f);
            if t != 0.0 {
                prop_assert!(fraction_unchecked(t, a * scale) >= f);
            }
        }
    }
}
