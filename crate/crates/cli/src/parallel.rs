//! Thread-pool execution of sweep trials.
//!
//! Trials are independent, so workers pull jobs from a shared counter and
//! results are keyed by job index; the assembled report is identical to the
//! sequential one regardless of completion order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use fracprox_core::bench::{
    assemble_report, run_trial_job, trial_jobs, SweepConfig, SweepReport, TrialJob, TrialOutcome,
};
use fracprox_core::Error;

/// Number of workers to use by default.
pub fn available_workers() -> usize {
    std::thread::available_parallelism()
        .map(usize::from)
        .unwrap_or(1)
}

/// Runs every job of `cfg` on `workers` threads and returns the per-job
/// success metrics in job order. `inspect` sees each finished trial (the
/// call order is nondeterministic, the data is not).
pub fn parallel_metrics<F>(
    cfg: &SweepConfig,
    workers: usize,
    inspect: F,
) -> Result<Vec<f64>, Error>
where
    F: Fn(&TrialJob, &TrialOutcome) + Sync,
{
    let jobs = trial_jobs(cfg);
    let workers = workers.max(1).min(jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Result<f64, Error>)>();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let jobs = &jobs;
            let next = &next;
            let inspect = &inspect;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let result = run_trial_job(cfg, &jobs[i]).map(|outcome| {
                    inspect(&jobs[i], &outcome);
                    cfg.metric(&outcome)
                });
                if tx.send((i, result)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut metrics = vec![f64::NAN; jobs.len()];
        let mut first_error = None;
        for (i, result) in rx {
            match result {
                Ok(metric) => metrics[i] = metric,
                Err(e) => first_error = first_error.or(Some(e)),
            }
        }
        match first_error {
            Some(e) => Err(e),
            None => Ok(metrics),
        }
    })
}

/// Parallel equivalent of [`fracprox_core::bench::sweep_success_rate`].
pub fn parallel_sweep(cfg: &SweepConfig, workers: usize) -> Result<SweepReport, Error> {
    cfg.validate()?;
    let metrics = parallel_metrics(cfg, workers, |_, _| {})?;
    assemble_report(cfg, &metrics)
}
