//! Thread-per-worker execution. Workers only evaluate; every decision goes
//! through the coordinator on the calling thread.

use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use super::{evaluate, Action, Coordinator, Job, JobId, RunOutcome, RunParams};
use crate::benchmarks::Benchmark;
use crate::error::{Error, Result};

pub(super) fn run_realtime(benchmark: &dyn Benchmark, params: &RunParams) -> Result<RunOutcome> {
    let mut coord = Coordinator::new(benchmark, params.clone())?;
    let start = Instant::now();
    let seed = params.seed;
    let time_scale = params.time_scale;

    thread::scope(|scope| {
        let (result_tx, result_rx) = mpsc::channel::<(usize, JobId, f64)>();
        let mut job_txs = Vec::with_capacity(params.n_workers);
        for worker in 0..params.n_workers {
            let (job_tx, job_rx) = mpsc::channel::<Job>();
            job_txs.push(job_tx);
            let result_tx = result_tx.clone();
            scope.spawn(move || {
                for job in job_rx {
                    let loss = evaluate(benchmark, seed, &job);
                    let wait = benchmark.cost(&job.config, job.budget) * time_scale;
                    if wait > 0.0 && wait.is_finite() {
                        thread::sleep(Duration::from_secs_f64(wait));
                    }
                    if result_tx.send((worker, job.id, loss)).is_err() {
                        break;
                    }
                }
            });
        }
        drop(result_tx);

        let mut free = vec![true; params.n_workers];
        loop {
            let now = start.elapsed().as_secs_f64();
            for (worker, is_free) in free.iter_mut().enumerate() {
                if !*is_free {
                    continue;
                }
                match coord.next_action(now) {
                    Action::Dispatch(job) => {
                        job_txs[worker]
                            .send(job)
                            .map_err(|_| Error::Evaluation(format!("worker {worker} exited")))?;
                        *is_free = false;
                    }
                    Action::Wait => break,
                }
            }
            if coord.pending_jobs() == 0 {
                break;
            }
            let (worker, job, loss) = result_rx
                .recv()
                .map_err(|_| Error::Evaluation("all workers exited".into()))?;
            coord.on_result(job, loss, start.elapsed().as_secs_f64(), Some(worker))?;
            free[worker] = true;
        }
        drop(job_txs);
        Ok::<(), Error>(())
    })?;

    Ok(RunOutcome {
        stats: coord.stats().clone(),
        trajectory: coord.into_trajectory(),
        dispatches: Vec::new(),
        idle_checks: Vec::new(),
    })
}
