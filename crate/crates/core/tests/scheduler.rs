use std::collections::{BTreeMap, HashSet};

use bohb::benchmarks::{Benchmark, CountingOnes, MfSphere};
use bohb::scheduler::{run, run_detailed, ClockMode, EventKind, OptimizerKind, Record, RunParams};

fn params(optimizer: OptimizerKind, n_workers: usize, n_iterations: usize, seed: u64) -> RunParams {
    RunParams {
        optimizer,
        n_workers,
        n_iterations,
        seed,
        ..Default::default()
    }
}

/// Integer-exact Hyperband geometry for integral `eta` and budgets that are
/// powers of `eta` apart: `(n_i, b_i)` per stage of bracket `s`.
fn reference_stages(s: u32, s_max: u32, eta: u64, max_budget: u64) -> Vec<(usize, f64)> {
    let n = ((s_max as u64 + 1) * eta.pow(s)).div_ceil(s as u64 + 1);
    (0..=s)
        .map(|i| {
            let count = (n / eta.pow(i)).max(1) as usize;
            let budget = (max_budget / eta.pow(s - i)) as f64;
            (count, budget)
        })
        .collect()
}

/// Indices of the `k` smallest losses, in original order. Ties keep the
/// earlier entry.
fn reference_survivors(losses: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..losses.len()).collect();
    idx.sort_by(|&a, &b| losses[a].total_cmp(&losses[b]).then(a.cmp(&b)));
    let mut keep = idx[..k].to_vec();
    keep.sort_unstable();
    keep
}

#[test]
fn single_worker_matches_sequential_hyperband() {
    let bench = CountingOnes::new(2, 2).unwrap();
    let iterations = 7;
    let traj = run(&bench, &params(OptimizerKind::Hyperband, 1, iterations, 21)).unwrap();
    let evals: Vec<&Record> = traj.evaluations().collect();

    // Sequential replay: runs and stages strictly in order, time = Σ budgets.
    let mut clock = 0.0;
    for r in &evals {
        clock += r.budget;
        assert_eq!(r.sim_time, clock);
        assert_eq!(r.cum_budget, clock);
    }
    assert!(evals
        .windows(2)
        .all(|w| (w[0].sh_run, w[0].stage) <= (w[1].sh_run, w[1].stage)));

    let s_max = 4;
    let mut by_stage: BTreeMap<(usize, usize), Vec<&Record>> = BTreeMap::new();
    for r in &evals {
        by_stage.entry((r.sh_run, r.stage)).or_default().push(r);
    }
    for run_id in 0..iterations {
        let s = s_max - (run_id as u32 % (s_max + 1));
        let stages = reference_stages(s, s_max, 3, 729);
        for (i, &(count, budget)) in stages.iter().enumerate() {
            let got = &by_stage[&(run_id, i)];
            assert_eq!(got.len(), count, "run {run_id} stage {i}");
            assert!(got.iter().all(|r| r.budget == budget));
            if i + 1 < stages.len() {
                let losses: Vec<f64> = got.iter().map(|r| r.loss).collect();
                let expected: Vec<_> = reference_survivors(&losses, stages[i + 1].0)
                    .into_iter()
                    .map(|j| got[j].config_id)
                    .collect();
                let next: Vec<_> = by_stage[&(run_id, i + 1)]
                    .iter()
                    .map(|r| r.config_id)
                    .collect();
                assert_eq!(next, expected, "run {run_id} stage {}", i + 1);
            }
        }
    }
    assert_eq!(by_stage.keys().map(|k| k.0).max(), Some(iterations - 1));
}

#[test]
fn workers_never_idle_while_work_is_runnable() {
    let bench = CountingOnes::new(4, 4).unwrap();
    for n_workers in [2, 4, 7] {
        let outcome = run_detailed(&bench, &params(OptimizerKind::Bohb, n_workers, 8, 2)).unwrap();
        assert!(!outcome.idle_checks.is_empty());
        for check in &outcome.idle_checks {
            assert!(
                !(check.idle_workers > 0 && check.runnable_work),
                "{n_workers} workers: idle with runnable work at t={}",
                check.time
            );
        }
    }
}

#[test]
fn smaller_budgets_are_dispatched_first() {
    let bench = CountingOnes::new(4, 4).unwrap();
    let outcome = run_detailed(&bench, &params(OptimizerKind::Hyperband, 5, 12, 4)).unwrap();
    let mut contested = 0;
    for d in &outcome.dispatches {
        if let Some(min) = d.runnable_budgets.iter().copied().reduce(f64::min) {
            assert!(
                d.budget <= min,
                "dispatched {} while {min} was runnable",
                d.budget
            );
            if d.runnable_budgets.len() > 1 {
                contested += 1;
            }
        }
    }
    assert!(contested > 0, "no instant had two runnable runs");
}

#[test]
fn later_runs_model_on_earlier_observations() {
    let bench = CountingOnes::new(4, 4).unwrap();
    let outcome = run_detailed(&bench, &params(OptimizerKind::Bohb, 2, 8, 5)).unwrap();
    assert!(outcome.stats.model_proposals > 0);
    assert!(outcome.stats.cross_run_model_proposals > 0);
}

#[test]
fn survivors_are_subsets_of_previous_stage() {
    let bench = CountingOnes::new(3, 3).unwrap();
    let traj = run(&bench, &params(OptimizerKind::Bohb, 3, 10, 6)).unwrap();
    let mut sets: BTreeMap<(usize, usize), HashSet<u64>> = BTreeMap::new();
    for r in traj.evaluations() {
        sets.entry((r.sh_run, r.stage))
            .or_default()
            .insert(r.config_id.0);
    }
    for (&(run_id, stage), ids) in &sets {
        if stage > 0 {
            assert!(ids.is_subset(&sets[&(run_id, stage - 1)]));
        }
    }
}

#[test]
fn incumbent_budget_rises_and_loss_falls_within_budget() {
    let bench = CountingOnes::new(4, 4).unwrap();
    for n_workers in [1, 3] {
        let traj = run(&bench, &params(OptimizerKind::Bohb, n_workers, 15, 7)).unwrap();
        let inc: Vec<&Record> = traj.incumbents().collect();
        assert!(!inc.is_empty());
        for w in inc.windows(2) {
            assert!(w[1].budget >= w[0].budget);
            if w[1].budget == w[0].budget {
                assert!(w[1].loss < w[0].loss);
            }
        }
        // Every incumbent is the best finite loss seen at its budget so far.
        let evals: Vec<&Record> = traj.records().iter().collect();
        for (pos, r) in evals
            .iter()
            .enumerate()
            .filter(|(_, r)| r.event == EventKind::Incumbent)
        {
            let best = evals[..pos]
                .iter()
                .filter(|e| e.event == EventKind::EvalEnd && e.budget == r.budget)
                .map(|e| e.loss)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(r.loss, best);
            assert!(evals[..pos].iter().all(|e| e.budget <= r.budget));
        }
    }
}

#[test]
fn simulated_runs_are_deterministic() {
    let bench = CountingOnes::new(4, 4).unwrap();
    for n_workers in [1, 4] {
        let p = params(OptimizerKind::Bohb, n_workers, 6, 8);
        let a = run(&bench, &p).unwrap().to_jsonl();
        let b = run(&bench, &p).unwrap().to_jsonl();
        assert_eq!(a, b);
        let other = run(&bench, &RunParams { seed: 9, ..p }).unwrap().to_jsonl();
        assert_ne!(a, other);
    }
}

#[test]
fn realtime_single_worker_matches_simulation() {
    let bench = CountingOnes::new(2, 2).unwrap();
    let p = params(OptimizerKind::Bohb, 1, 5, 10);
    let sim = run(&bench, &p).unwrap();
    let real = run(
        &bench,
        &RunParams {
            clock: ClockMode::Realtime,
            ..p
        },
    )
    .unwrap();
    let key = |r: &Record| {
        (
            r.event,
            r.sh_run,
            r.stage,
            r.budget,
            r.config_id,
            r.loss,
            r.provenance,
        )
    };
    let a: Vec<_> = sim.records().iter().map(key).collect();
    let b: Vec<_> = real.records().iter().map(key).collect();
    assert_eq!(a, b);
}

#[test]
fn continuous_only_benchmark_runs_end_to_end() {
    let bench = MfSphere::new(3).unwrap();
    let (lo, hi) = bench.budget_range();
    let mut p = params(OptimizerKind::Bohb, 2, 10, 12);
    p.hyperband.min_budget = lo;
    p.hyperband.max_budget = hi;
    let traj = run(&bench, &p).unwrap();
    let first = traj.incumbents().next().unwrap().regret.unwrap();
    let last = traj.final_regret().unwrap();
    assert!(last < first, "{first} -> {last}");
}
