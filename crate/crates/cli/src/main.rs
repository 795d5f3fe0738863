//! `fracprox` — sparse recovery with fraction-function thresholding.
//!
//! Subcommands:
//!   solve      run one solver on an instance file or a synthetic instance
//!   sweep      success-rate sweep over sparsity levels, CSV + JSON output
//!   prox-plot  emit scalar objective / thresholding-operator curve data
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 runtime error.

use std::fs;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};

use fracprox_cli::instance::read_instance;
use fracprox_cli::parallel::{available_workers, parallel_sweep};
use fracprox_cli::report::{curve_to_csv, run_to_json, sweep_to_csv, sweep_to_json};
use fracprox_core::bench::{
    build_trial_instance, relative_error, solver_rng_seed, SolverSpec, SparseSignal, SweepConfig,
};
use fracprox_core::penalty::ScalarObjectiveSpec;
use fracprox_core::prox::{sample_objective_curve, scalar_prox};
use fracprox_core::solvers::{
    run_cifpta_s1, run_cifpta_s2, run_ifpta_s1, run_ifpta_s2, run_ista_soft,
    AdaptiveCifptaConfig, AdaptiveIfptaConfig,
};
use fracprox_core::{
    FractionPenaltyParams, ProblemInstance, SolverRun, StoppingRule,
};

const EXIT_CONFIG: i32 = 2;
const EXIT_RUNTIME: i32 = 3;

#[derive(Parser)]
#[command(
    name = "fracprox",
    version,
    about = "Sparse signal recovery with fraction-function thresholding solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on an instance and write the run trace as JSON.
    Solve(SolveArgs),
    /// Success-rate sweep over sparsity levels; writes CSV and JSON reports.
    Sweep(SweepArgs),
    /// Emit curve data for the scalar objective or the thresholding operator.
    ProxPlot(ProxPlotArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["instance", "random"])))]
struct SolveArgs {
    /// Path to a plain-text instance: `m n`, m matrix rows, observation line.
    #[arg(long)]
    instance: Option<PathBuf>,

    /// Synthesize a seeded Gaussian instance: M N R ALPHA (b = A*xbar).
    #[arg(long, num_args = 4, value_names = ["M", "N", "R", "ALPHA"])]
    random: Option<Vec<String>>,

    /// ifpta-s1 | ifpta-s2 | cifpta-s1 | cifpta-s2 | ista
    #[arg(long)]
    solver: String,

    /// Seed for synthetic instances and fallback draws
    /// (falls back to $FRACPROX_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,

    /// Regularization weight (required by ifpta-s1, cifpta-s1, ista).
    #[arg(long)]
    lambda: Option<f64>,

    /// Shape parameter a (default 2 for IFPTA; convexity boundary for cifpta-s1).
    #[arg(long)]
    a: Option<f64>,

    /// Safety factor of the adaptive IFPTA rule.
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,

    /// Convexity margin of the adaptive CIFPTA rule, in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    tau: f64,

    /// Offset cap of the adaptive CIFPTA rule.
    #[arg(long, default_value_t = 1e-4)]
    zeta: f64,

    /// Interval fraction of the adaptive CIFPTA rule, in [0, 1).
    #[arg(long, default_value_t = 0.5)]
    c: f64,

    /// Integer range LO:HI for the fallback shape parameter.
    #[arg(long, default_value = "1:100")]
    ahat_range: String,

    /// Sparsity estimate r for adaptive solvers (defaults to R with --random).
    #[arg(long)]
    sparsity: Option<usize>,

    /// Step size: `auto` means 0.99 / ||A||_2^2.
    #[arg(long, default_value = "auto")]
    mu: String,

    /// Relative-change stopping tolerance.
    #[arg(long, default_value_t = 1e-15)]
    tol: f64,

    /// Iteration cap.
    #[arg(long, default_value_t = 3000)]
    max_iters: usize,

    /// Where to write the run JSON.
    #[arg(long, default_value = "run.json")]
    output: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 128)]
    m: usize,

    #[arg(long, default_value_t = 512)]
    n: usize,

    /// Preset m=32, n=128 for quick runs.
    #[arg(long)]
    small: bool,

    /// Dynamic-range exponent of the planted signals.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,

    /// Sparsity grid LO:STEP:HI (or a single value).
    #[arg(long, default_value = "10:5:70")]
    r: String,

    /// Trials per (solver, sparsity) cell.
    #[arg(long, default_value_t = 30)]
    trials: usize,

    /// Comma-separated solvers: cifpta-s2, ifpta-s2, cifpta-s1, ifpta-s1, ista.
    #[arg(long, default_value = "cifpta-s2,ifpta-s2,ista", value_delimiter = ',')]
    solvers: Vec<String>,

    /// Base seed (falls back to $FRACPROX_SEED, then 1).
    #[arg(long)]
    seed: Option<u64>,

    /// Success threshold on the recovery error.
    #[arg(long, default_value_t = 1e-4)]
    success_tol: f64,

    /// Divide the recovery error by ||xbar||_2 before thresholding
    /// (not part of the reference protocol).
    #[arg(long)]
    relative: bool,

    /// Worker threads (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,

    /// IFPTA-S2 shape parameter.
    #[arg(long, default_value_t = 2.0)]
    ifpta_a: f64,

    /// IFPTA-S2 safety factor.
    #[arg(long, default_value_t = 0.01)]
    ifpta_epsilon: f64,

    /// CIFPTA-S2 convexity margin.
    #[arg(long, default_value_t = 0.5)]
    tau: f64,

    /// CIFPTA-S2 offset cap.
    #[arg(long, default_value_t = 1e-4)]
    zeta: f64,

    /// CIFPTA-S2 interval fraction.
    #[arg(long, default_value_t = 0.5)]
    c: f64,

    /// CIFPTA-S2 fallback integer range LO:HI.
    #[arg(long, default_value = "1:100")]
    ahat_range: String,

    /// ISTA baseline weight.
    #[arg(long, default_value_t = 0.01)]
    ista_lambda: f64,

    /// Fixed weight for Scheme-1 solvers (required when one is listed).
    #[arg(long)]
    s1_lambda: Option<f64>,

    /// Fixed shape parameter for Scheme-1 solvers
    /// (cifpta-s1 defaults to the convexity boundary).
    #[arg(long)]
    s1_a: Option<f64>,

    /// Output prefix; writes <prefix>.csv and <prefix>.json.
    #[arg(long, default_value = "sweep")]
    out: String,
}

#[derive(Args)]
struct ProxPlotArgs {
    #[arg(long)]
    lambda: f64,

    #[arg(long)]
    a: f64,

    /// Anchor of the scalar objective (mode `f` only).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gamma: f64,

    /// Sampling range LO:HI.
    #[arg(long, default_value = "-2:2", allow_hyphen_values = true)]
    range: String,

    #[arg(long, default_value_t = 400)]
    points: usize,

    /// `f` samples the scalar objective; `prox` samples the thresholding map.
    #[arg(long, default_value = "f")]
    mode: String,

    #[arg(long, default_value = "curve.csv")]
    output: PathBuf,
}

struct Failure {
    code: i32,
    message: String,
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

fn runtime_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        message: message.into(),
    }
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::ProxPlot(args) => cmd_prox_plot(args),
    };
    if let Err(failure) = result {
        eprintln!("error: {}", failure.message);
        std::process::exit(failure.code);
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("FRACPROX_SEED").ok()?.trim().parse().ok()
}

fn parse_pair<T: std::str::FromStr>(text: &str, flag: &str) -> Result<(T, T), Failure> {
    let mut parts = text.split(':');
    let err = || config_error(format!("{flag} expects LO:HI, got `{text}`"));
    let lo = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
    let hi = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
    if parts.next().is_some() {
        return Err(err());
    }
    Ok((lo, hi))
}

fn parse_grid(text: &str) -> Result<Vec<usize>, Failure> {
    let err = |msg: &str| config_error(format!("--r: {msg} (got `{text}`)"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [single] => {
            let r = single
                .parse::<usize>()
                .map_err(|_| err("expected an integer or LO:STEP:HI"))?;
            Ok(vec![r])
        }
        [lo, step, hi] => {
            let lo: usize = lo.parse().map_err(|_| err("bad LO"))?;
            let step: usize = step.parse().map_err(|_| err("bad STEP"))?;
            let hi: usize = hi.parse().map_err(|_| err("bad HI"))?;
            if step == 0 {
                return Err(err("STEP must be positive"));
            }
            if hi < lo {
                return Err(err("HI must be >= LO"));
            }
            Ok((lo..=hi).step_by(step).collect())
        }
        _ => Err(err("expected an integer or LO:STEP:HI")),
    }
}

/// `--mu auto` resolves to the instance default; explicit values are
/// range-checked against the cached spectral norm.
fn resolve_mu(p: &ProblemInstance, text: &str) -> Result<f64, Failure> {
    if text == "auto" {
        return p
            .default_mu()
            .map_err(|e| config_error(format!("--mu auto: {e}")));
    }
    let mu: f64 = text
        .parse()
        .map_err(|_| config_error(format!("--mu expects `auto` or a float, got `{text}`")))?;
    let limit = 1.0 / p.spectral_norm_sq();
    if !(mu > 0.0 && mu < limit) {
        return Err(config_error(format!(
            "--mu {mu} outside (0, {limit}) required by this instance"
        )));
    }
    Ok(mu)
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let seed = args.seed.or_else(env_seed).unwrap_or(0);

    let (problem, ground_truth): (ProblemInstance, Option<SparseSignal>) =
        if let Some(path) = &args.instance {
            let p = read_instance(path).map_err(|e| config_error(format!("--instance: {e}")))?;
            (p, None)
        } else {
            let raw = args.random.as_ref().expect("clap enforces the source group");
            let m: usize = raw[0]
                .parse()
                .map_err(|_| config_error(format!("--random M must be an integer, got `{}`", raw[0])))?;
            let n: usize = raw[1]
                .parse()
                .map_err(|_| config_error(format!("--random N must be an integer, got `{}`", raw[1])))?;
            let r: usize = raw[2]
                .parse()
                .map_err(|_| config_error(format!("--random R must be an integer, got `{}`", raw[2])))?;
            let alpha: f64 = raw[3]
                .parse()
                .map_err(|_| config_error(format!("--random ALPHA must be a float, got `{}`", raw[3])))?;
            let (p, signal) = build_trial_instance(m, n, r, alpha, seed)
                .map_err(|e| config_error(format!("--random: {e}")))?;
            (p, Some(signal))
        };

    let mu = resolve_mu(&problem, &args.mu)?;
    let stop = StoppingRule::new(args.tol, args.max_iters)
        .map_err(|e| config_error(format!("--tol/--max-iters: {e}")))?;
    let x0 = vec![0.0; problem.cols()];

    let sparsity = || -> Result<usize, Failure> {
        args.sparsity
            .or_else(|| ground_truth.as_ref().map(|s| s.support.len()))
            .ok_or_else(|| config_error("--sparsity is required for adaptive solvers on --instance"))
    };
    let lambda = |flag_user: &str| -> Result<f64, Failure> {
        args.lambda
            .ok_or_else(|| config_error(format!("--lambda is required by --solver {flag_user}")))
    };

    let solver_name = args.solver.to_ascii_lowercase();
    let run: SolverRun = match solver_name.as_str() {
        "ifpta-s1" => {
            let params = FractionPenaltyParams::new(lambda("ifpta-s1")?, args.a.unwrap_or(2.0), mu)
                .map_err(|e| config_error(format!("--lambda/--a: {e}")))?;
            run_ifpta_s1(&problem, &x0, &params, &stop)
                .map_err(|e| runtime_error(format!("ifpta-s1: {e}")))?
        }
        "ifpta-s2" => {
            let cfg = AdaptiveIfptaConfig::new(args.a.unwrap_or(2.0), args.epsilon, sparsity()?)
                .map_err(|e| config_error(format!("--a/--epsilon/--sparsity: {e}")))?;
            run_ifpta_s2(&problem, &x0, &cfg, mu, &stop)
                .map_err(|e| runtime_error(format!("ifpta-s2: {e}")))?
        }
        "cifpta-s1" => {
            let lambda = lambda("cifpta-s1")?;
            let bound = 1.0 / (lambda * mu).sqrt();
            let a = args.a.unwrap_or(bound);
            if a > bound * (1.0 + 1e-12) {
                return Err(config_error(format!(
                    "--a {a} violates the convexity bound a <= 1/sqrt(lambda*mu) = {bound}"
                )));
            }
            let params = FractionPenaltyParams::new(lambda, a, mu)
                .map_err(|e| config_error(format!("--lambda/--a: {e}")))?;
            run_cifpta_s1(&problem, &x0, &params, &stop)
                .map_err(|e| runtime_error(format!("cifpta-s1: {e}")))?
        }
        "cifpta-s2" => {
            let ahat = parse_pair::<u32>(&args.ahat_range, "--ahat-range")?;
            let spec_for_seed = SolverSpec::CifptaS2 {
                tau: args.tau,
                zeta: args.zeta,
                c: args.c,
                a_hat_lo: ahat.0,
                a_hat_hi: ahat.1,
            };
            let cfg = AdaptiveCifptaConfig::new(
                args.tau,
                args.zeta,
                args.c,
                ahat,
                sparsity()?,
                solver_rng_seed(seed, &spec_for_seed),
            )
            .map_err(|e| config_error(format!("--tau/--zeta/--c/--ahat-range/--sparsity: {e}")))?;
            run_cifpta_s2(&problem, &x0, &cfg, mu, &stop)
                .map_err(|e| runtime_error(format!("cifpta-s2: {e}")))?
        }
        "ista" | "ista-soft" => run_ista_soft(&problem, &x0, lambda("ista")?, mu, &stop)
            .map_err(|e| runtime_error(format!("ista: {e}")))?,
        other => {
            return Err(config_error(format!(
                "--solver `{other}` is not one of ifpta-s1, ifpta-s2, cifpta-s1, cifpta-s2, ista"
            )))
        }
    };

    fs::write(&args.output, run_to_json(&run))
        .map_err(|e| runtime_error(format!("cannot write {}: {e}", args.output.display())))?;

    match &ground_truth {
        Some(signal) => {
            let re = relative_error(&run.final_iterate, signal)
                .map_err(|e| runtime_error(e.to_string()))?;
            println!(
                "solver={} iterations={} stop_reason={:?} re={re:e}",
                args.solver, run.iterations, run.stop_reason
            );
        }
        None => println!(
            "solver={} iterations={} stop_reason={:?}",
            args.solver, run.iterations, run.stop_reason
        ),
    }
    Ok(())
}

fn solver_spec_from_name(name: &str, args: &SweepArgs) -> Result<SolverSpec, Failure> {
    let s1_lambda = |which: &str| -> Result<f64, Failure> {
        args.s1_lambda
            .ok_or_else(|| config_error(format!("--s1-lambda is required when `{which}` is swept")))
    };
    match name.to_ascii_lowercase().as_str() {
        "ifpta-s1" => Ok(SolverSpec::IfptaS1 {
            lambda: s1_lambda("ifpta-s1")?,
            a: args.s1_a.unwrap_or(2.0),
        }),
        "ifpta-s2" => Ok(SolverSpec::IfptaS2 {
            a: args.ifpta_a,
            epsilon: args.ifpta_epsilon,
        }),
        "cifpta-s1" => Ok(SolverSpec::CifptaS1 {
            lambda: s1_lambda("cifpta-s1")?,
            a: args.s1_a,
        }),
        "cifpta-s2" => {
            let ahat = parse_pair::<u32>(&args.ahat_range, "--ahat-range")?;
            Ok(SolverSpec::CifptaS2 {
                tau: args.tau,
                zeta: args.zeta,
                c: args.c,
                a_hat_lo: ahat.0,
                a_hat_hi: ahat.1,
            })
        }
        "ista" | "ista-soft" => Ok(SolverSpec::IstaSoft {
            lambda: args.ista_lambda,
        }),
        other => Err(config_error(format!(
            "--solvers entry `{other}` is not one of ifpta-s1, ifpta-s2, cifpta-s1, cifpta-s2, ista"
        ))),
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let (m, n) = if args.small { (32, 128) } else { (args.m, args.n) };
    let grid = parse_grid(&args.r)?;
    let base_seed = args.seed.or_else(env_seed).unwrap_or(1);

    let mut solvers = Vec::with_capacity(args.solvers.len());
    for name in &args.solvers {
        solvers.push(solver_spec_from_name(name, &args)?);
    }

    let mut cfg = SweepConfig::new(m, n, args.alpha, grid, args.trials, base_seed, solvers)
        .map_err(|e| config_error(format!("--m/--n/--r/--trials/--solvers: {e}")))?;
    cfg.success_tol = args.success_tol;
    cfg.relative = args.relative;
    cfg.validate()
        .map_err(|e| config_error(format!("--success-tol: {e}")))?;

    let jobs = args.jobs.unwrap_or_else(available_workers);
    if jobs == 0 {
        return Err(config_error("--jobs must be >= 1"));
    }
    let report =
        parallel_sweep(&cfg, jobs).map_err(|e| runtime_error(format!("sweep failed: {e}")))?;

    let csv_path = format!("{}.csv", args.out);
    let json_path = format!("{}.json", args.out);
    fs::write(&csv_path, sweep_to_csv(&report))
        .map_err(|e| runtime_error(format!("cannot write {csv_path}: {e}")))?;
    fs::write(&json_path, sweep_to_json(&report))
        .map_err(|e| runtime_error(format!("cannot write {json_path}: {e}")))?;

    for curve in &report.per_solver {
        let shown: Vec<String> = curve
            .success_rates
            .iter()
            .map(|v| format!("{v:.2}"))
            .collect();
        println!("{:>10}: [{}]", curve.solver, shown.join(", "));
    }
    println!("wrote {csv_path} and {json_path}");
    Ok(())
}

fn cmd_prox_plot(args: ProxPlotArgs) -> Result<(), Failure> {
    let (lo, hi) = parse_pair::<f64>(&args.range, "--range")?;
    if !(lo < hi) {
        return Err(config_error(format!("--range requires LO < HI, got {lo}:{hi}")));
    }
    if args.points < 2 {
        return Err(config_error("--points must be at least 2"));
    }
    if !(args.lambda > 0.0 && args.a > 0.0) {
        return Err(config_error("--lambda and --a must be positive"));
    }

    let csv = match args.mode.as_str() {
        "f" => {
            let spec = ScalarObjectiveSpec::new(args.gamma, args.lambda, args.a)
                .map_err(|e| config_error(format!("--gamma/--lambda/--a: {e}")))?;
            let curve = sample_objective_curve(&spec, lo, hi, args.points)
                .map_err(|e| config_error(format!("--range/--points: {e}")))?;
            curve_to_csv(("beta", "f"), &curve)
        }
        "prox" => {
            let step = (hi - lo) / (args.points - 1) as f64;
            let curve: Vec<(f64, f64)> = (0..args.points)
                .map(|i| {
                    let gamma = lo + step * i as f64;
                    (gamma, scalar_prox(gamma, args.lambda, args.a))
                })
                .collect();
            curve_to_csv(("gamma", "h"), &curve)
        }
        other => {
            return Err(config_error(format!(
                "--mode `{other}` must be `f` or `prox`"
            )))
        }
    };

    fs::write(&args.output, csv)
        .map_err(|e| runtime_error(format!("cannot write {}: {e}", args.output.display())))?;
    println!("wrote {}", args.output.display());
    Ok(())
}
