//! Runs optimizers over a shared worker pool.
//!
//! A single [`Coordinator`] owns all optimizer state. Whenever a worker is
//! free it asks the coordinator for work: among the active SuccessiveHalving
//! runs, the runnable job with the smallest budget is dispatched (older runs
//! win ties). A new SH run is opened only when no active run can use the
//! worker. All observations go into one store shared by every run.
//!
//! Two drivers exist: a deterministic discrete-event simulation where an
//! evaluation occupies its worker for `cost(config, budget)` virtual seconds,
//! and a realtime driver with one thread per worker.

mod clock;
mod realtime;
mod trajectory;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use clock::{ClockMode, SimClock};
pub use trajectory::{mean_first_reaching, Axis, EventKind, Record, Trajectory};

use crate::bandit::{hyperband_brackets, Advance, BracketSpec, HyperbandParams, ShRunState, Stage};
use crate::benchmarks::Benchmark;
use crate::configspace::{ConfigId, Configuration, IdGen};
use crate::error::{Error, Result};
use crate::sampler::{self, Observation, ObservationStore, Provenance, SamplerParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Bohb,
    /// Hyperband with uniformly random configurations.
    Hyperband,
    /// Uniform sampling, every evaluation at the maximum budget.
    RandomSearch,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 3] = [
        OptimizerKind::Bohb,
        OptimizerKind::Hyperband,
        OptimizerKind::RandomSearch,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            OptimizerKind::Bohb => "bohb",
            OptimizerKind::Hyperband => "hyperband",
            OptimizerKind::RandomSearch => "random_search",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "bohb" => Ok(OptimizerKind::Bohb),
            "hyperband" | "hb" => Ok(OptimizerKind::Hyperband),
            "random_search" | "rs" | "random" => Ok(OptimizerKind::RandomSearch),
            other => Err(Error::invalid(
                "optimizer",
                format!("unknown optimizer `{other}` (expected bohb, hyperband, random_search)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub optimizer: OptimizerKind,
    pub hyperband: HyperbandParams,
    pub sampler: SamplerParams,
    pub n_workers: usize,
    /// Number of SH runs to open. For random search, one iteration is
    /// `s_max + 1` evaluations at the maximum budget.
    pub n_iterations: usize,
    /// Stop opening SH runs once this much budget has been dispatched.
    pub max_total_budget: Option<f64>,
    pub clock: ClockMode,
    /// Realtime seconds slept per unit of evaluation cost.
    pub time_scale: f64,
    pub seed: u64,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            optimizer: OptimizerKind::Bohb,
            hyperband: HyperbandParams::default(),
            sampler: SamplerParams::default(),
            n_workers: 1,
            n_iterations: 10,
            max_total_budget: None,
            clock: ClockMode::Simulated,
            time_scale: 0.0,
            seed: 0,
        }
    }
}

impl RunParams {
    pub fn validate(&self) -> Result<()> {
        self.hyperband.validate()?;
        self.sampler.validate()?;
        if self.n_workers == 0 {
            return Err(Error::invalid("n_workers", "must be at least 1"));
        }
        if self.n_iterations == 0 && self.max_total_budget.is_none() {
            return Err(Error::invalid("n_iterations", "must be at least 1"));
        }
        if let Some(b) = self.max_total_budget {
            if !(b > 0.0) {
                return Err(Error::invalid("max_total_budget", "must be positive"));
            }
        }
        if !(self.time_scale >= 0.0 && self.time_scale.is_finite()) {
            return Err(Error::invalid("time_scale", "must be >= 0"));
        }
        Ok(())
    }

    /// Bracket sequence the optimizer cycles through.
    pub fn brackets(&self) -> Vec<BracketSpec> {
        match self.optimizer {
            OptimizerKind::Bohb | OptimizerKind::Hyperband => hyperband_brackets(&self.hyperband),
            OptimizerKind::RandomSearch => {
                let n = self.hyperband.s_max() + 1;
                let b = self.hyperband.max_budget;
                vec![BracketSpec {
                    s: 0,
                    n,
                    initial_budget: b,
                    stages: vec![Stage {
                        count: n,
                        budget: b,
                    }],
                }]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JobId(pub u64);

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A unit of work handed to a worker.
#[derive(Debug, Clone)]
pub struct Job {
    pub id: JobId,
    pub config: Configuration,
    pub budget: f64,
    pub sh_run: usize,
    pub stage: usize,
    pub provenance: Provenance,
    pub dispatched_at: f64,
}

#[derive(Debug, Clone)]
pub enum Action {
    Dispatch(Job),
    Wait,
}

/// Random stream for evaluating job `job` of a run seeded with `seed`.
/// Stream 0 belongs to the sampler.
pub fn eval_rng(seed: u64, job: JobId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(job.0 + 1);
    rng
}

#[derive(Debug, Clone)]
struct Incumbent {
    config: Configuration,
    budget: f64,
    loss: f64,
}

struct ShRun {
    id: usize,
    state: ShRunState,
    configs: HashMap<ConfigId, (Configuration, Provenance)>,
    /// Aligned with the current stage's entries.
    dispatched: Vec<bool>,
}

impl ShRun {
    fn has_runnable(&self) -> bool {
        self.dispatched.iter().any(|d| !d) || self.state.needs_configs()
    }
}

struct PendingJob {
    run: usize,
    config: ConfigId,
    budget: f64,
    stage: usize,
    provenance: Provenance,
}

/// Counters describing what the coordinator did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoordinatorStats {
    pub random_proposals: usize,
    pub model_proposals: usize,
    /// Model proposals whose model data includes observations from older SH runs.
    pub cross_run_model_proposals: usize,
    pub sh_runs_opened: usize,
    pub sh_runs_finished: usize,
}

/// Owns the store, the live SH runs and the trajectory.
pub struct Coordinator<'a> {
    benchmark: &'a dyn Benchmark,
    params: RunParams,
    brackets: Vec<BracketSpec>,
    store: ObservationStore,
    runs: Vec<ShRun>,
    pending: BTreeMap<JobId, PendingJob>,
    completed: HashSet<JobId>,
    next_job: u64,
    rng: ChaCha8Rng,
    ids: IdGen,
    config_run: HashMap<ConfigId, usize>,
    dispatched_budget: f64,
    spent_budget: f64,
    incumbent: Option<Incumbent>,
    trajectory: Trajectory,
    stats: CoordinatorStats,
}

impl<'a> Coordinator<'a> {
    pub fn new(benchmark: &'a dyn Benchmark, params: RunParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            benchmark,
            brackets: params.brackets(),
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            params,
            store: ObservationStore::new(),
            runs: Vec::new(),
            pending: BTreeMap::new(),
            completed: HashSet::new(),
            next_job: 0,
            ids: IdGen::new(),
            config_run: HashMap::new(),
            dispatched_budget: 0.0,
            spent_budget: 0.0,
            incumbent: None,
            trajectory: Trajectory::new(),
            stats: CoordinatorStats::default(),
        })
    }

    pub fn params(&self) -> &RunParams {
        &self.params
    }

    pub fn store(&self) -> &ObservationStore {
        &self.store
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn stats(&self) -> &CoordinatorStats {
        &self.stats
    }

    pub fn into_trajectory(self) -> Trajectory {
        self.trajectory
    }

    pub fn pending_jobs(&self) -> usize {
        self.pending.len()
    }

    fn can_open_run(&self) -> bool {
        let under_budget = self
            .params
            .max_total_budget
            .is_none_or(|cap| self.dispatched_budget < cap);
        // Zero iterations with a budget cap means "until the cap".
        let under_iterations = (self.params.max_total_budget.is_some()
            && self.params.n_iterations == 0)
            || self.stats.sh_runs_opened < self.params.n_iterations;
        under_budget && under_iterations
    }

    /// Budgets of the next job of every active run that has runnable work,
    /// in run order.
    pub fn runnable_budgets(&self) -> Vec<f64> {
        self.runs
            .iter()
            .filter(|r| r.has_runnable())
            .map(|r| r.state.stage_budget())
            .collect()
    }

    /// Whether a free worker would receive a job right now.
    pub fn has_runnable_work(&self) -> bool {
        self.runs.iter().any(ShRun::has_runnable) || self.can_open_run()
    }

    /// True once every SH run is complete and no more may be opened.
    pub fn is_done(&self) -> bool {
        self.pending.is_empty() && !self.has_runnable_work()
    }

    /// Decides what a free worker should do at time `now`.
    pub fn next_action(&mut self, now: f64) -> Action {
        let mut choice: Option<(usize, f64)> = None;
        for (i, run) in self.runs.iter().enumerate() {
            if !run.has_runnable() {
                continue;
            }
            let b = run.state.stage_budget();
            if choice.is_none_or(|(_, best)| b < best) {
                choice = Some((i, b));
            }
        }
        let idx = match choice {
            Some((i, _)) => i,
            None if self.can_open_run() => self.open_run(),
            None => return Action::Wait,
        };
        Action::Dispatch(self.dispatch_from(idx, now))
    }

    fn open_run(&mut self) -> usize {
        let id = self.stats.sh_runs_opened;
        let bracket = self.brackets[id % self.brackets.len()].clone();
        self.stats.sh_runs_opened += 1;
        self.runs.push(ShRun {
            id,
            state: ShRunState::new(bracket),
            configs: HashMap::new(),
            dispatched: Vec::new(),
        });
        self.runs.len() - 1
    }

    fn sample(&mut self, run_id: usize) -> (Configuration, Provenance) {
        let space = self.benchmark.space();
        match self.params.optimizer {
            OptimizerKind::Bohb => {
                let p = sampler::propose(
                    &self.store,
                    &self.params.sampler,
                    space,
                    &mut self.rng,
                    &self.ids,
                );
                match (&p.provenance, &p.trace) {
                    (Provenance::Model, Some(trace)) => {
                        self.stats.model_proposals += 1;
                        let uses_older = self.store.at_budget(trace.budget).iter().any(|o| {
                            self.config_run
                                .get(&o.config.id())
                                .is_some_and(|&r| r < run_id)
                        });
                        if uses_older {
                            self.stats.cross_run_model_proposals += 1;
                        }
                    }
                    _ => self.stats.random_proposals += 1,
                }
                (p.config, p.provenance)
            }
            OptimizerKind::Hyperband | OptimizerKind::RandomSearch => {
                self.stats.random_proposals += 1;
                (
                    space.sample_uniform(&mut self.rng, &self.ids),
                    Provenance::Random,
                )
            }
        }
    }

    fn dispatch_from(&mut self, idx: usize, now: f64) -> Job {
        let run_id = self.runs[idx].id;
        let slot = self.runs[idx].dispatched.iter().position(|d| !d);
        let (config, provenance) = match slot {
            Some(i) => {
                let run = &mut self.runs[idx];
                run.dispatched[i] = true;
                run.configs[&run.state.entries()[i].id].clone()
            }
            None => {
                let (config, provenance) = self.sample(run_id);
                let run = &mut self.runs[idx];
                run.state
                    .add(config.id())
                    .expect("run accepts configurations when runnable");
                run.dispatched.push(true);
                run.configs
                    .insert(config.id(), (config.clone(), provenance));
                self.config_run.insert(config.id(), run_id);
                (config, provenance)
            }
        };
        let run = &self.runs[idx];
        let job = Job {
            id: JobId(self.next_job),
            budget: run.state.stage_budget(),
            stage: run.state.stage(),
            sh_run: run_id,
            provenance,
            config,
            dispatched_at: now,
        };
        self.next_job += 1;
        self.dispatched_budget += job.budget;
        self.pending.insert(
            job.id,
            PendingJob {
                run: run_id,
                config: job.config.id(),
                budget: job.budget,
                stage: job.stage,
                provenance,
            },
        );
        job
    }

    /// Records the loss of a finished job at time `now`.
    pub fn on_result(
        &mut self,
        job: JobId,
        loss: f64,
        now: f64,
        worker: Option<usize>,
    ) -> Result<()> {
        if self.completed.contains(&job) {
            return Err(Error::DuplicateResult(job.0));
        }
        let pending = self.pending.remove(&job).ok_or(Error::UnknownJob(job.0))?;
        self.completed.insert(job);
        let loss = sampler::sanitize_loss(loss);

        let idx = self
            .runs
            .iter()
            .position(|r| r.id == pending.run)
            .ok_or_else(|| Error::Contract(format!("SH run {} is not active", pending.run)))?;
        let config = self.runs[idx].configs[&pending.config].0.clone();
        self.runs[idx].state.report(pending.config, loss)?;

        self.store.record(Observation {
            config: config.clone(),
            budget: pending.budget,
            loss,
            worker,
            time: now,
        });
        self.spent_budget += pending.budget;

        let spent = self.spent_budget;
        let benchmark = self.benchmark;
        let record = |event, config: &Configuration, budget, loss, provenance| Record {
            event,
            sim_time: now,
            cum_budget: spent,
            sh_run: pending.run,
            stage: pending.stage,
            budget,
            config_id: config.id(),
            loss,
            provenance,
            regret: benchmark.regret(config),
        };
        let eval = record(
            EventKind::EvalEnd,
            &config,
            pending.budget,
            loss,
            pending.provenance,
        );
        self.trajectory.push(eval);

        let improves = loss.is_finite()
            && self.incumbent.as_ref().is_none_or(|inc| {
                pending.budget > inc.budget || (pending.budget == inc.budget && loss < inc.loss)
            });
        if improves {
            let inc = record(
                EventKind::Incumbent,
                &config,
                pending.budget,
                loss,
                pending.provenance,
            );
            self.trajectory.push(inc);
            self.incumbent = Some(Incumbent {
                config,
                budget: pending.budget,
                loss,
            });
        }

        let run = &mut self.runs[idx];
        if run.state.is_stage_complete() {
            match run.state.advance()? {
                Advance::Promoted(ids) => run.dispatched = vec![false; ids.len()],
                Advance::Finished { .. } => {
                    self.runs.remove(idx);
                    self.stats.sh_runs_finished += 1;
                }
            }
        }
        Ok(())
    }

    /// Best configuration under the incumbent rule, with its budget and loss.
    pub fn incumbent(&self) -> Option<(&Configuration, f64, f64)> {
        self.incumbent
            .as_ref()
            .map(|inc| (&inc.config, inc.budget, inc.loss))
    }
}

/// A dispatch decision made by the simulated driver.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchRecord {
    pub time: f64,
    pub worker: usize,
    pub job: JobId,
    pub sh_run: usize,
    pub budget: f64,
    /// Budgets of every run that had runnable work just before the decision.
    pub runnable_budgets: Vec<f64>,
}

/// Worker occupancy after all dispatches at one event instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdleCheck {
    pub time: f64,
    pub idle_workers: usize,
    pub runnable_work: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub stats: CoordinatorStats,
    /// Populated in simulated mode only.
    pub dispatches: Vec<DispatchRecord>,
    /// Populated in simulated mode only.
    pub idle_checks: Vec<IdleCheck>,
}

/// Runs one optimizer and returns its trajectory.
pub fn run(benchmark: &dyn Benchmark, params: &RunParams) -> Result<Trajectory> {
    Ok(run_detailed(benchmark, params)?.trajectory)
}

/// Like [`run`], also returning the scheduling log.
pub fn run_detailed(benchmark: &dyn Benchmark, params: &RunParams) -> Result<RunOutcome> {
    match params.clock {
        ClockMode::Simulated => simulate(benchmark, params),
        ClockMode::Realtime => realtime::run_realtime(benchmark, params),
    }
}

fn evaluate(benchmark: &dyn Benchmark, seed: u64, job: &Job) -> f64 {
    let mut rng = eval_rng(seed, job.id);
    benchmark
        .evaluate(&job.config, job.budget, &mut rng)
        .map(sampler::sanitize_loss)
        .unwrap_or(f64::INFINITY)
}

fn simulate(benchmark: &dyn Benchmark, params: &RunParams) -> Result<RunOutcome> {
    let mut coord = Coordinator::new(benchmark, params.clone())?;
    let mut clock: SimClock<(JobId, f64)> = SimClock::new();
    let mut free = vec![true; params.n_workers];
    let mut dispatches = Vec::new();
    let mut idle_checks = Vec::new();

    loop {
        let now = clock.now();
        for (worker, is_free) in free.iter_mut().enumerate() {
            if !*is_free {
                continue;
            }
            let runnable_budgets = coord.runnable_budgets();
            match coord.next_action(now) {
                Action::Dispatch(job) => {
                    let loss = evaluate(benchmark, params.seed, &job);
                    let cost = benchmark.cost(&job.config, job.budget);
                    dispatches.push(DispatchRecord {
                        time: now,
                        worker,
                        job: job.id,
                        sh_run: job.sh_run,
                        budget: job.budget,
                        runnable_budgets,
                    });
                    clock.schedule(worker, cost, (job.id, loss));
                    *is_free = false;
                }
                Action::Wait => break,
            }
        }
        idle_checks.push(IdleCheck {
            time: now,
            idle_workers: free.iter().filter(|f| **f).count(),
            runnable_work: coord.has_runnable_work(),
        });

        let due = clock.advance();
        if due.is_empty() {
            break;
        }
        let now = clock.now();
        for (worker, (job, loss)) in due {
            coord.on_result(job, loss, now, Some(worker))?;
            free[worker] = true;
        }
    }
    debug_assert!(coord.is_done());
    Ok(RunOutcome {
        stats: coord.stats().clone(),
        trajectory: coord.into_trajectory(),
        dispatches,
        idle_checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::CountingOnes;

    fn params(optimizer: OptimizerKind, workers: usize, iterations: usize) -> RunParams {
        RunParams {
            optimizer,
            n_workers: workers,
            n_iterations: iterations,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn two_workers_start_in_first_run() {
        let bench = CountingOnes::with_dim(4).unwrap();
        let mut coord = Coordinator::new(&bench, params(OptimizerKind::Bohb, 2, 5)).unwrap();
        for _ in 0..2 {
            match coord.next_action(0.0) {
                Action::Dispatch(job) => {
                    assert_eq!(job.sh_run, 0);
                    assert_eq!(job.budget, 9.0);
                }
                Action::Wait => panic!("expected work"),
            }
        }
    }

    #[test]
    fn fully_sampled_run_opens_next_one() {
        let bench = CountingOnes::with_dim(4).unwrap();
        let mut p = params(OptimizerKind::Hyperband, 2, 5);
        p.hyperband = HyperbandParams::new(1.0, 1.0, 3.0).unwrap();
        let mut coord = Coordinator::new(&bench, p).unwrap();
        // A single one-config bracket: run 0 is fully sampled after one dispatch.
        let Action::Dispatch(first) = coord.next_action(0.0) else {
            panic!()
        };
        let Action::Dispatch(second) = coord.next_action(0.0) else {
            panic!()
        };
        assert_eq!((first.sh_run, second.sh_run), (0, 1));
    }

    #[test]
    fn waits_when_iterations_exhausted() {
        let bench = CountingOnes::with_dim(4).unwrap();
        let mut p = params(OptimizerKind::Hyperband, 2, 1);
        p.hyperband = HyperbandParams::new(1.0, 1.0, 3.0).unwrap();
        let mut coord = Coordinator::new(&bench, p).unwrap();
        let Action::Dispatch(job) = coord.next_action(0.0) else {
            panic!()
        };
        assert!(matches!(coord.next_action(0.0), Action::Wait));
        assert!(!coord.is_done());
        coord.on_result(job.id, -1.0, 1.0, None).unwrap();
        assert!(coord.is_done());
    }

    #[test]
    fn duplicate_and_unknown_results_are_rejected() {
        let bench = CountingOnes::with_dim(4).unwrap();
        let mut coord = Coordinator::new(&bench, params(OptimizerKind::Bohb, 1, 1)).unwrap();
        let Action::Dispatch(job) = coord.next_action(0.0) else {
            panic!()
        };
        coord.on_result(job.id, -1.0, 9.0, Some(0)).unwrap();
        assert!(matches!(
            coord.on_result(job.id, -1.0, 9.0, Some(0)),
            Err(Error::DuplicateResult(_))
        ));
        assert!(matches!(
            coord.on_result(JobId(999), -1.0, 9.0, Some(0)),
            Err(Error::UnknownJob(999))
        ));
    }

    #[test]
    fn small_budget_result_never_displaces_large_budget_incumbent() {
        let bench = CountingOnes::with_dim(4).unwrap();
        let mut p = params(OptimizerKind::Hyperband, 3, 3);
        p.hyperband = HyperbandParams::new(9.0, 27.0, 3.0).unwrap();
        let mut coord = Coordinator::new(&bench, p).unwrap();
        let take = |coord: &mut Coordinator, now| match coord.next_action(now) {
            Action::Dispatch(j) => j,
            Action::Wait => panic!("expected work"),
        };
        // Bracket s=1: 3 configs at 9 -> 1 at 27.
        let jobs: Vec<Job> = (0..3).map(|_| take(&mut coord, 0.0)).collect();
        for (j, loss) in jobs.iter().zip([-1.0, -2.0, -0.5]) {
            coord.on_result(j.id, loss, 1.0, None).unwrap();
        }
        let promoted = take(&mut coord, 1.0);
        assert_eq!(promoted.budget, 27.0);
        assert_eq!(promoted.config.id(), jobs[1].config.id());
        coord.on_result(promoted.id, -1.5, 2.0, None).unwrap();
        let (inc, inc_budget, _) = coord.incumbent().unwrap();
        let inc = inc.id();
        assert_eq!(inc_budget, 27.0);

        // Run 1 (s=0, two configs at 27) fills two workers, run 2 starts at 9.
        let a = take(&mut coord, 2.0);
        let b = take(&mut coord, 2.0);
        let c = take(&mut coord, 2.0);
        assert_eq!((a.budget, b.budget, c.budget), (27.0, 27.0, 9.0));
        assert_eq!(c.sh_run, 2);
        coord.on_result(c.id, -100.0, 3.0, None).unwrap();
        assert_eq!(coord.incumbent().unwrap().0.id(), inc);
        coord.on_result(a.id, -1.0, 3.0, None).unwrap();
        assert_eq!(coord.incumbent().unwrap().0.id(), inc);
        coord.on_result(b.id, -1.75, 3.0, None).unwrap();
        assert_eq!(coord.incumbent().unwrap().0.id(), b.config.id());
    }

    #[test]
    fn infinite_loss_is_recorded_not_promoted() {
        let bench = CountingOnes::with_dim(4).unwrap();
        let mut p = params(OptimizerKind::Hyperband, 3, 1);
        p.hyperband = HyperbandParams::new(9.0, 27.0, 3.0).unwrap();
        let mut coord = Coordinator::new(&bench, p).unwrap();
        let jobs: Vec<Job> = (0..3)
            .map(|_| match coord.next_action(0.0) {
                Action::Dispatch(j) => j,
                Action::Wait => panic!(),
            })
            .collect();
        coord.on_result(jobs[0].id, f64::NAN, 1.0, None).unwrap();
        coord.on_result(jobs[1].id, 0.0, 1.0, None).unwrap();
        coord.on_result(jobs[2].id, 1.0, 1.0, None).unwrap();
        assert_eq!(coord.store().count(9.0), 3);
        let Action::Dispatch(promoted) = coord.next_action(1.0) else {
            panic!()
        };
        assert_eq!(promoted.config.id(), jobs[1].config.id());
        assert_eq!(coord.trajectory().records()[0].loss, f64::INFINITY);
    }

    #[test]
    fn single_worker_time_is_sum_of_costs() {
        let bench = CountingOnes::with_dim(4).unwrap();
        let outcome = run_detailed(&bench, &params(OptimizerKind::Bohb, 1, 5)).unwrap();
        let total: f64 = outcome.trajectory.evaluations().map(|r| r.budget).sum();
        let last = outcome.trajectory.records().last().unwrap();
        assert_eq!(last.sim_time, total);
        assert_eq!(last.cum_budget, total);
    }

    #[test]
    fn random_search_evaluates_only_at_max_budget() {
        let bench = CountingOnes::with_dim(4).unwrap();
        let traj = run(&bench, &params(OptimizerKind::RandomSearch, 1, 3)).unwrap();
        assert_eq!(traj.evaluations().count(), 15);
        assert!(traj.evaluations().all(|r| r.budget == 729.0));
    }

    #[test]
    fn budget_cap_stops_opening_runs() {
        let bench = CountingOnes::with_dim(4).unwrap();
        let mut p = params(OptimizerKind::Hyperband, 1, 0);
        p.max_total_budget = Some(5000.0);
        let traj = run(&bench, &p).unwrap();
        // Runs 0 (3645) and 1 (3267) are opened; run 2 would start past the cap.
        let runs: HashSet<usize> = traj.evaluations().map(|r| r.sh_run).collect();
        assert_eq!(runs.len(), 2);
    }

    #[test]
    fn optimizer_names_parse() {
        for k in OptimizerKind::ALL {
            assert_eq!(k.as_str().parse::<OptimizerKind>().unwrap(), k);
        }
        assert_eq!(
            "hb".parse::<OptimizerKind>().unwrap(),
            OptimizerKind::Hyperband
        );
        assert!("tpe".parse::<OptimizerKind>().is_err());
    }
}
