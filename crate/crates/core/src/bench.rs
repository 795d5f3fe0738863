//! Seeded recovery experiments: Gaussian instances, sparse test signals,
//! recovery error, and success-rate sweeps over sparsity.
//!
//! Every quantity is a pure function of the seeds, so trials can run in any
//! order (or concurrently) and reports are reproducible bit for bit. For a
//! fixed `(r, trial)` cell all solvers see the same instance; only the
//! fallback draw stream inside CIFPTA-S2 is solver-specific.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::float;
use crate::linalg;
use crate::model::{FractionPenaltyParams, ProblemInstance, SolverRun, StoppingRule};
use crate::rng::{mix, SplitMix64};
use crate::solvers::{
    run_cifpta_s1, run_cifpta_s2, run_ifpta_s1, run_ifpta_s2, run_ista_soft,
    AdaptiveCifptaConfig, AdaptiveIfptaConfig,
};

const SALT_MATRIX: u64 = 0x4D41_5452;
const SALT_SIGNAL: u64 = 0x5349_474E;
const SALT_SOLVER_RNG: u64 = 0x534F_4C56;

/// Ground-truth r-sparse signal with its generation metadata.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SparseSignal {
    pub values: Vec<f64>,
    /// Nonzero positions, ascending.
    pub support: Vec<usize>,
    pub alpha: f64,
    pub seed: u64,
}

/// Row-major `m x n` matrix with i.i.d. standard normal entries,
/// deterministic per seed.
pub fn gen_gaussian_matrix(m: usize, n: usize, seed: u64) -> Vec<f64> {
    let mut data = vec![0.0; m * n];
    SplitMix64::new(seed).fill_standard_normal(&mut data);
    data
}

/// Ground-truth signal with a uniformly random r-subset support (partial
/// Fisher–Yates) and nonzeros `sign * 10^(alpha * eta)`, `eta` uniform on
/// `[0, 1]`, signs equiprobable.
pub fn gen_sparse_signal(n: usize, r: usize, alpha: f64, seed: u64) -> Result<SparseSignal> {
    if r == 0 || r > n {
        return Err(Error::SparsityOutOfRange { r, n });
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter("alpha must be >= 0 and finite"));
    }
    let mut rng = SplitMix64::new(seed);

    let mut indices: Vec<usize> = (0..n).collect();
    for i in 0..r {
        let j = i + rng.next_below((n - i) as u64) as usize;
        indices.swap(i, j);
    }
    let mut support: Vec<usize> = indices[..r].to_vec();
    support.sort_unstable();

    let mut values = vec![0.0; n];
    for &idx in &support {
        let sign = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
        let eta = rng.next_f64();
        values[idx] = sign * float::pow(10.0, alpha * eta);
    }
    Ok(SparseSignal {
        values,
        support,
        alpha,
        seed,
    })
}

/// Recovery error `||x - xbar||_2` (an absolute l2 distance).
pub fn relative_error(x: &[f64], xbar: &SparseSignal) -> Result<f64> {
    if x.len() != xbar.values.len() {
        return Err(Error::DimensionMismatch {
            what: "recovered signal",
            expected: xbar.values.len(),
            actual: x.len(),
        });
    }
    Ok(linalg::distance(x, &xbar.values))
}

/// A solver plus the parameters it runs with inside a trial.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum SolverSpec {
    IfptaS1 {
        lambda: f64,
        a: f64,
    },
    IfptaS2 {
        a: f64,
        epsilon: f64,
    },
    CifptaS1 {
        lambda: f64,
        /// `None` selects the convexity boundary `1/sqrt(lambda * mu)` per instance.
        a: Option<f64>,
    },
    CifptaS2 {
        tau: f64,
        zeta: f64,
        c: f64,
        a_hat_lo: u32,
        a_hat_hi: u32,
    },
    IstaSoft {
        lambda: f64,
    },
}

impl SolverSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SolverSpec::IfptaS1 { .. } => "IFPTA-S1",
            SolverSpec::IfptaS2 { .. } => "IFPTA-S2",
            SolverSpec::CifptaS1 { .. } => "CIFPTA-S1",
            SolverSpec::CifptaS2 { .. } => "CIFPTA-S2",
            SolverSpec::IstaSoft { .. } => "ISTA-soft",
        }
    }

    fn kind_id(&self) -> u64 {
        match self {
            SolverSpec::IfptaS1 { .. } => 1,
            SolverSpec::IfptaS2 { .. } => 2,
            SolverSpec::CifptaS1 { .. } => 3,
            SolverSpec::CifptaS2 { .. } => 4,
            SolverSpec::IstaSoft { .. } => 5,
        }
    }

    /// IFPTA-S2 with the experiment settings `a = 2`, `epsilon = 0.01`.
    pub fn ifpta_s2_defaults() -> Self {
        SolverSpec::IfptaS2 {
            a: 2.0,
            epsilon: 0.01,
        }
    }

    /// CIFPTA-S2 with the experiment settings `tau = 0.5`, `zeta = 1e-4`,
    /// `c = 0.5`, fallback integers 1..=100.
    pub fn cifpta_s2_defaults() -> Self {
        SolverSpec::CifptaS2 {
            tau: 0.5,
            zeta: 1e-4,
            c: 0.5,
            a_hat_lo: 1,
            a_hat_hi: 100,
        }
    }

    /// Soft-thresholding baseline with a small fixed weight.
    pub fn ista_defaults() -> Self {
        SolverSpec::IstaSoft { lambda: 0.01 }
    }
}

/// Result of one seeded trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// `||x* - xbar||_2`.
    pub re: f64,
    /// `||xbar||_2`, for optional normalization.
    pub signal_norm: f64,
    /// Step size the solver ran with (`0.99 / ||A||_2^2`).
    pub mu: f64,
    pub run: SolverRun,
}

/// Builds the seeded instance of one trial: Gaussian matrix, planted sparse
/// signal, and exact data `b = A xbar`. The matrix and signal streams are
/// derived from `seed` with fixed salts, so the same seed always produces the
/// same instance no matter which solver consumes it.
pub fn build_trial_instance(
    m: usize,
    n: usize,
    r: usize,
    alpha: f64,
    seed: u64,
) -> Result<(ProblemInstance, SparseSignal)> {
    let signal = gen_sparse_signal(n, r, alpha, mix(seed, SALT_SIGNAL))?;
    let data = gen_gaussian_matrix(m, n, mix(seed, SALT_MATRIX));
    let mut b = vec![0.0; m];
    for (bi, row) in b.iter_mut().zip(data.chunks_exact(n)) {
        *bi = linalg::dot(row, &signal.values);
    }
    let p = ProblemInstance::new(m, n, data, b)?;
    Ok((p, signal))
}

/// Seed for the fallback-draw stream of CIFPTA-S2 inside a trial;
/// solver-specific so that paired instances stay identical across solvers.
pub fn solver_rng_seed(trial_seed: u64, spec: &SolverSpec) -> u64 {
    mix(trial_seed, mix(SALT_SOLVER_RNG, spec.kind_id()))
}

/// Builds a seeded instance (`b = A xbar` exactly), runs the solver from zero
/// with the experiment stopping rule, and reports the recovery error.
pub fn run_trial(
    m: usize,
    n: usize,
    r: usize,
    alpha: f64,
    spec: &SolverSpec,
    seed: u64,
) -> Result<TrialOutcome> {
    let (p, signal) = build_trial_instance(m, n, r, alpha, seed)?;
    let mu = p.default_mu()?;
    let stop = StoppingRule::experiment_default();
    let x0 = vec![0.0; n];

    let run = match spec {
        SolverSpec::IfptaS1 { lambda, a } => {
            let params = FractionPenaltyParams::new(*lambda, *a, mu)?;
            run_ifpta_s1(&p, &x0, &params, &stop)?
        }
        SolverSpec::IfptaS2 { a, epsilon } => {
            let cfg = AdaptiveIfptaConfig::new(*a, *epsilon, r)?;
            run_ifpta_s2(&p, &x0, &cfg, mu, &stop)?
        }
        SolverSpec::CifptaS1 { lambda, a } => {
            let a = a.unwrap_or(1.0 / float::sqrt(*lambda * mu));
            let params = FractionPenaltyParams::new(*lambda, a, mu)?;
            run_cifpta_s1(&p, &x0, &params, &stop)?
        }
        SolverSpec::CifptaS2 {
            tau,
            zeta,
            c,
            a_hat_lo,
            a_hat_hi,
        } => {
            let cfg = AdaptiveCifptaConfig::new(
                *tau,
                *zeta,
                *c,
                (*a_hat_lo, *a_hat_hi),
                r,
                solver_rng_seed(seed, spec),
            )?;
            run_cifpta_s2(&p, &x0, &cfg, mu, &stop)?
        }
        SolverSpec::IstaSoft { lambda } => run_ista_soft(&p, &x0, *lambda, mu, &stop)?,
    };

    let re = relative_error(&run.final_iterate, &signal)?;
    Ok(TrialOutcome {
        re,
        signal_norm: linalg::norm(&signal.values),
        mu,
        run,
    })
}

/// Sweep configuration: grid of sparsity levels, trial count, and solvers.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SweepConfig {
    pub m: usize,
    pub n: usize,
    pub alpha: f64,
    pub r_grid: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub solvers: Vec<SolverSpec>,
    /// Success declared when the metric is at or below this value.
    pub success_tol: f64,
    /// Divide the recovery error by `||xbar||_2` before thresholding.
    pub relative: bool,
}

impl SweepConfig {
    pub fn new(
        m: usize,
        n: usize,
        alpha: f64,
        r_grid: Vec<usize>,
        trials: usize,
        base_seed: u64,
        solvers: Vec<SolverSpec>,
    ) -> Result<Self> {
        let cfg = Self {
            m,
            n,
            alpha,
            r_grid,
            trials,
            base_seed,
            solvers,
            success_tol: 1e-4,
            relative: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_grid.is_empty() {
            return Err(Error::InvalidParameter("sparsity grid must be nonempty"));
        }
        if !self.r_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("sparsity grid must be strictly increasing"));
        }
        if let Some(&r) = self.r_grid.iter().find(|&&r| r == 0 || r > self.n) {
            return Err(Error::SparsityOutOfRange { r, n: self.n });
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1"));
        }
        if self.solvers.is_empty() {
            return Err(Error::InvalidParameter("at least one solver is required"));
        }
        if !(self.success_tol > 0.0 && self.success_tol.is_finite()) {
            return Err(Error::InvalidParameter("success_tol must be positive and finite"));
        }
        Ok(())
    }

    /// The success metric for one trial outcome.
    pub fn metric(&self, outcome: &TrialOutcome) -> f64 {
        if self.relative {
            outcome.re / outcome.signal_norm.max(f64::MIN_POSITIVE)
        } else {
            outcome.re
        }
    }
}

/// Instance seed for a `(r, trial)` cell. Deliberately solver-independent so
/// that comparisons between solvers are paired.
pub fn trial_seed(base_seed: u64, r: usize, trial_index: usize) -> u64 {
    mix(mix(base_seed, r as u64), trial_index as u64)
}

/// One cell of work inside a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialJob {
    pub solver_index: usize,
    pub r_index: usize,
    pub trial_index: usize,
    pub seed: u64,
}

/// The full job list of a sweep, in deterministic solver-major order.
pub fn trial_jobs(cfg: &SweepConfig) -> Vec<TrialJob> {
    let mut jobs =
        Vec::with_capacity(cfg.solvers.len() * cfg.r_grid.len() * cfg.trials);
    for solver_index in 0..cfg.solvers.len() {
        for (r_index, &r) in cfg.r_grid.iter().enumerate() {
            for trial_index in 0..cfg.trials {
                jobs.push(TrialJob {
                    solver_index,
                    r_index,
                    trial_index,
                    seed: trial_seed(cfg.base_seed, r, trial_index),
                });
            }
        }
    }
    jobs
}

/// Runs one job of a sweep.
pub fn run_trial_job(cfg: &SweepConfig, job: &TrialJob) -> Result<TrialOutcome> {
    run_trial(
        cfg.m,
        cfg.n,
        cfg.r_grid[job.r_index],
        cfg.alpha,
        &cfg.solvers[job.solver_index],
        job.seed,
    )
}

/// Success-rate curves for a set of solvers over a sparsity grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SweepReport {
    pub grid: Vec<usize>,
    pub per_solver: Vec<SolverCurve>,
    pub trials: usize,
    pub config_digest: ConfigDigest,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SolverCurve {
    pub solver: String,
    pub success_rates: Vec<f64>,
}

impl SweepReport {
    /// The success-rate curve of the named solver, if present.
    pub fn curve(&self, solver: &str) -> Option<&[f64]> {
        self.per_solver
            .iter()
            .find(|c| c.solver == solver)
            .map(|c| c.success_rates.as_slice())
    }
}

/// Everything the report depends on; the report is a pure function of this.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConfigDigest {
    pub m: usize,
    pub n: usize,
    pub alpha: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub success_tol: f64,
    pub relative: bool,
    pub mu_policy: String,
    pub stopping: String,
    pub solvers: Vec<SolverSpec>,
}

impl ConfigDigest {
    fn from_config(cfg: &SweepConfig) -> Self {
        Self {
            m: cfg.m,
            n: cfg.n,
            alpha: cfg.alpha,
            trials: cfg.trials,
            base_seed: cfg.base_seed,
            success_tol: cfg.success_tol,
            relative: cfg.relative,
            mu_policy: String::from("mu = 0.99 / ||A||_2^2"),
            stopping: String::from("rel_change <= 1e-15 or 3000 iterations"),
            solvers: cfg.solvers.clone(),
        }
    }
}

/// Folds per-job metrics (aligned with [`trial_jobs`] order) into the report.
/// Completion order of the jobs never matters, only their positions.
pub fn assemble_report(cfg: &SweepConfig, metrics: &[f64]) -> Result<SweepReport> {
    let expected = cfg.solvers.len() * cfg.r_grid.len() * cfg.trials;
    if metrics.len() != expected {
        return Err(Error::DimensionMismatch {
            what: "sweep metrics",
            expected,
            actual: metrics.len(),
        });
    }
    let mut per_solver = Vec::with_capacity(cfg.solvers.len());
    for (si, spec) in cfg.solvers.iter().enumerate() {
        let mut success_rates = Vec::with_capacity(cfg.r_grid.len());
        for ri in 0..cfg.r_grid.len() {
            let base = (si * cfg.r_grid.len() + ri) * cfg.trials;
            let successes = metrics[base..base + cfg.trials]
                .iter()
                .filter(|&&re| re <= cfg.success_tol)
                .count();
            success_rates.push(successes as f64 / cfg.trials as f64);
        }
        per_solver.push(SolverCurve {
            solver: String::from(spec.name()),
            success_rates,
        });
    }
    Ok(SweepReport {
        grid: cfg.r_grid.clone(),
        per_solver,
        trials: cfg.trials,
        config_digest: ConfigDigest::from_config(cfg),
    })
}

/// Runs the whole sweep sequentially. Callers that want parallelism can map
/// [`trial_jobs`] themselves and call [`assemble_report`].
pub fn sweep_success_rate(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let jobs = trial_jobs(cfg);
    let mut metrics = Vec::with_capacity(jobs.len());
    for job in &jobs {
        let outcome = run_trial_job(cfg, job)?;
        metrics.push(cfg.metric(&outcome));
    }
    assemble_report(cfg, &metrics)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_generation_is_deterministic_and_seed_sensitive() {
        let a = gen_gaussian_matrix(6, 9, 42);
        let b = gen_gaussian_matrix(6, 9, 42);
        assert_eq!(a, b);
        let c = gen_gaussian_matrix(6, 9, 43);
        assert!(a.iter().zip(&c).any(|(x, y)| x != y));
    }

    #[test]
    fn matrix_entries_look_standard_normal() {
        let m = 128;
        let n = 512;
        let data = gen_gaussian_matrix(m, n, 7);
        let count = (m * n) as f64;
        let mean = data.iter().sum::<f64>() / count;
        assert!(mean.abs() < 4.0 / count.sqrt(), "mean {mean}");
        let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / count;
        assert!((var - 1.0).abs() < 0.1, "variance {var}");
    }

    #[test]
    fn signal_generation_respects_alpha() {
        let s = gen_sparse_signal(64, 8, 0.0, 5).unwrap();
        assert_eq!(s.support.len(), 8);
        for &i in &s.support {
            assert!(s.values[i] == 1.0 || s.values[i] == -1.0);
        }
        let nnz = s.values.iter().filter(|&&v| v != 0.0).count();
        assert_eq!(nnz, 8);

        let s = gen_sparse_signal(64, 8, 2.0, 6).unwrap();
        for &i in &s.support {
            let mag = s.values[i].abs();
            assert!((1.0..=100.0).contains(&mag), "magnitude {mag}");
        }
    }

    #[test]
    fn signal_invariants_across_alpha_grid() {
        for (k, &alpha) in [0.0, 1.0, 1.5, 2.0].iter().enumerate() {
            for seed in 0..250u64 {
                let s = gen_sparse_signal(32, 5, alpha, seed * 7 + k as u64).unwrap();
                assert_eq!(s.support.len(), 5);
                assert!(s.support.windows(2).all(|w| w[0] < w[1]));
                let cap = crate::float::pow(10.0, alpha);
                for (i, &v) in s.values.iter().enumerate() {
                    if s.support.contains(&i) {
                        assert!(v != 0.0);
                        let mag = v.abs();
                        assert!(mag >= 1.0 && mag <= cap * (1.0 + 1e-12));
                    } else {
                        assert_eq!(v, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn signal_signs_are_balanced() {
        let mut plus = 0usize;
        let mut total = 0usize;
        for seed in 0..1000u64 {
            let s = gen_sparse_signal(40, 10, 1.0, seed).unwrap();
            for &i in &s.support {
                total += 1;
                if s.values[i] > 0.0 {
                    plus += 1;
                }
            }
        }
        let freq = plus as f64 / total as f64;
        assert!((0.48..=0.52).contains(&freq), "sign frequency {freq}");
    }

    #[test]
    fn signal_rejects_bad_sparsity() {
        assert!(matches!(
            gen_sparse_signal(8, 0, 1.0, 1),
            Err(Error::SparsityOutOfRange { .. })
        ));
        assert!(matches!(
            gen_sparse_signal(8, 9, 1.0, 1),
            Err(Error::SparsityOutOfRange { .. })
        ));
    }

    #[test]
    fn relative_error_examples() {
        let s = gen_sparse_signal(16, 3, 1.0, 9).unwrap();
        assert_eq!(relative_error(&s.values, &s).unwrap(), 0.0);
        let mut x = s.values.clone();
        x[0] += 1e-5;
        assert!((relative_error(&x, &s).unwrap() - 1e-5).abs() < 1e-18);
        assert!(relative_error(&x[..8], &s).is_err());
    }

    #[test]
    fn run_trial_rejects_zero_sparsity_and_is_deterministic() {
        let spec = SolverSpec::cifpta_s2_defaults();
        assert!(matches!(
            run_trial(8, 16, 0, 1.0, &spec, 1),
            Err(Error::SparsityOutOfRange { .. })
        ));
        let a = run_trial(16, 48, 2, 1.0, &spec, 33).unwrap();
        let b = run_trial(16, 48, 2, 1.0, &spec, 33).unwrap();
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.run.final_iterate, b.run.final_iterate);
    }

    #[test]
    fn jobs_share_instance_seeds_across_solvers() {
        let cfg = SweepConfig::new(
            8,
            16,
            1.0,
            vec![1, 2],
            3,
            99,
            vec![SolverSpec::cifpta_s2_defaults(), SolverSpec::ista_defaults()],
        )
        .unwrap();
        let jobs = trial_jobs(&cfg);
        let cells = cfg.r_grid.len() * cfg.trials;
        assert_eq!(jobs.len(), 2 * cells);
        for i in 0..cells {
            assert_eq!(jobs[i].seed, jobs[cells + i].seed);
            assert_ne!(jobs[i].solver_index, jobs[cells + i].solver_index);
        }
    }

    #[test]
    fn tiny_sweep_produces_binary_rates_and_is_pure() {
        let cfg = SweepConfig::new(
            8,
            16,
            1.0,
            vec![1],
            1,
            5,
            vec![SolverSpec::cifpta_s2_defaults(), SolverSpec::ista_defaults()],
        )
        .unwrap();
        let report = sweep_success_rate(&cfg).unwrap();
        assert_eq!(report.grid, vec![1]);
        assert_eq!(report.per_solver.len(), 2);
        for curve in &report.per_solver {
            assert_eq!(curve.success_rates.len(), 1);
            let rate = curve.success_rates[0];
            assert!(rate == 0.0 || rate == 1.0);
        }
        let again = sweep_success_rate(&cfg).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn sweep_config_validation() {
        let solver = vec![SolverSpec::ista_defaults()];
        assert!(SweepConfig::new(8, 16, 1.0, vec![], 1, 0, solver.clone()).is_err());
        assert!(SweepConfig::new(8, 16, 1.0, vec![2, 2], 1, 0, solver.clone()).is_err());
        assert!(SweepConfig::new(8, 16, 1.0, vec![1], 0, 0, solver.clone()).is_err());
        assert!(SweepConfig::new(8, 16, 1.0, vec![17], 1, 0, solver.clone()).is_err());
        assert!(SweepConfig::new(8, 16, 1.0, vec![1], 1, 0, vec![]).is_err());
        assert!(SweepConfig::new(8, 16, 1.0, vec![1, 4], 2, 0, solver).is_ok());
    }
}
