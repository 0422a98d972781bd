//! Hyperband bracket arithmetic and the SuccessiveHalving state machine.

use serde::{Deserialize, Serialize};

use crate::configspace::ConfigId;
use crate::error::{Error, Result};

/// Relative slack for floating-point budget comparisons.
const BUDGET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbandParams {
    pub min_budget: f64,
    pub max_budget: f64,
    pub eta: f64,
}

impl Default for HyperbandParams {
    fn default() -> Self {
        Self {
            min_budget: 9.0,
            max_budget: 729.0,
            eta: 3.0,
        }
    }
}

impl HyperbandParams {
    pub fn new(min_budget: f64, max_budget: f64, eta: f64) -> Result<Self> {
        let p = Self {
            min_budget,
            max_budget,
            eta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_budget > 0.0 && self.min_budget.is_finite()) {
            return Err(Error::invalid("min_budget", "must be positive"));
        }
        if !(self.max_budget.is_finite() && self.max_budget >= self.min_budget) {
            return Err(Error::invalid(
                "max_budget",
                format!("must be >= min_budget ({})", self.min_budget),
            ));
        }
        if !(self.eta > 1.0 && self.eta.is_finite()) {
            return Err(Error::invalid("eta", "must be > 1"));
        }
        Ok(())
    }

    /// `floor(log_eta(max_budget / min_budget))`.
    pub fn s_max(&self) -> usize {
        let ratio = (self.max_budget / self.min_budget).ln() / self.eta.ln();
        (ratio + BUDGET_TOL).floor().max(0.0) as usize
    }
}

/// One SuccessiveHalving stage: `count` configurations at `budget`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub count: usize,
    pub budget: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketSpec {
    pub s: usize,
    pub n: usize,
    pub initial_budget: f64,
    pub stages: Vec<Stage>,
}

impl BracketSpec {
    /// `sum_k n_k * b_k`.
    pub fn total_budget(&self) -> f64 {
        self.stages
            .iter()
            .map(|st| st.count as f64 * st.budget)
            .sum()
    }

    pub fn final_budget(&self) -> f64 {
        self.stages
            .last()
            .map_or(self.initial_budget, |st| st.budget)
    }
}

/// Stage list for SuccessiveHalving from `n` configurations at `b0` up to `max_budget`.
///
/// Each stage keeps `floor(n_k / eta)` configurations (never fewer than one)
/// and multiplies the budget by `eta`; the last stage runs at `max_budget`.
pub fn sh_stages(n: usize, b0: f64, max_budget: f64, eta: f64) -> Vec<Stage> {
    let mut stages = Vec::new();
    let mut count = n.max(1);
    let mut budget = b0.min(max_budget);
    loop {
        if budget >= max_budget * (1.0 - BUDGET_TOL) {
            stages.push(Stage {
                count,
                budget: max_budget,
            });
            return stages;
        }
        stages.push(Stage { count, budget });
        count = ((count as f64 / eta + BUDGET_TOL).floor() as usize).max(1);
        budget *= eta;
    }
}

/// All Hyperband brackets, most aggressive (`s = s_max`) first.
pub fn hyperband_brackets(params: &HyperbandParams) -> Vec<BracketSpec> {
    let s_max = params.s_max();
    (0..=s_max)
        .rev()
        .map(|s| {
            let raw = (s_max + 1) as f64 / (s + 1) as f64 * params.eta.powi(s as i32);
            let n = (raw - BUDGET_TOL * raw).ceil().max(1.0) as usize;
            let b0 = params.max_budget * params.eta.powi(-(s as i32));
            BracketSpec {
                s,
                n,
                initial_budget: b0,
                stages: sh_stages(n, b0, params.max_budget, params.eta),
            }
        })
        .collect()
}

/// Indices of the `k` lowest losses; ties resolved by position. The result
/// is returned in ascending index order.
pub fn top_k(losses: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..losses.len()).collect();
    idx.sort_by(|&a, &b| losses[a].total_cmp(&losses[b]));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageEntry {
    pub id: ConfigId,
    pub loss: Option<f64>,
}

/// Outcome of completing a stage.
#[derive(Debug, Clone, PartialEq)]
pub enum Advance {
    /// The next stage's configurations, in their original order.
    Promoted(Vec<ConfigId>),
    /// The run is over; the best configuration of the final stage.
    Finished { best: ConfigId, loss: f64 },
}

/// Live progress of one SuccessiveHalving run.
#[derive(Debug, Clone)]
pub struct ShRunState {
    bracket: BracketSpec,
    stage: usize,
    entries: Vec<StageEntry>,
    finished: bool,
}

impl ShRunState {
    pub fn new(bracket: BracketSpec) -> Self {
        Self {
            bracket,
            stage: 0,
            entries: Vec::new(),
            finished: false,
        }
    }

    pub fn bracket(&self) -> &BracketSpec {
        &self.bracket
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn stage_budget(&self) -> f64 {
        self.bracket.stages[self.stage].budget
    }

    /// Target number of configurations in the current stage.
    pub fn stage_size(&self) -> usize {
        self.bracket.stages[self.stage].count
    }

    pub fn is_final_stage(&self) -> bool {
        self.stage + 1 == self.bracket.stages.len()
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn entries(&self) -> &[StageEntry] {
        &self.entries
    }

    /// Whether the current stage still accepts new configurations.
    pub fn needs_configs(&self) -> bool {
        !self.finished && self.entries.len() < self.stage_size()
    }

    /// Adds a freshly sampled configuration to the first stage.
    pub fn add(&mut self, id: ConfigId) -> Result<()> {
        if self.stage != 0 || !self.needs_configs() {
            return Err(Error::Contract(
                "configurations can only be added to an unfilled first stage".into(),
            ));
        }
        self.entries.push(StageEntry { id, loss: None });
        Ok(())
    }

    /// Stores the loss of `id` in the current stage.
    pub fn report(&mut self, id: ConfigId, loss: f64) -> Result<()> {
        let entry = self
            .entries
            .iter_mut()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::Contract(format!("config {id} is not in the current stage")))?;
        if entry.loss.is_some() {
            return Err(Error::Contract(format!(
                "config {id} already has a loss in stage {}",
                self.stage
            )));
        }
        entry.loss = Some(crate::sampler::sanitize_loss(loss));
        Ok(())
    }

    pub fn is_stage_complete(&self) -> bool {
        !self.finished
            && self.entries.len() == self.stage_size()
            && self.entries.iter().all(|e| e.loss.is_some())
    }

    /// Closes the current stage: keeps the best `n_{k+1}` configurations, or
    /// returns the overall best after the final stage.
    pub fn advance(&mut self) -> Result<Advance> {
        if !self.is_stage_complete() {
            return Err(Error::Contract(format!(
                "stage {} advanced before all {} evaluations completed",
                self.stage,
                self.stage_size()
            )));
        }
        let losses: Vec<f64> = self.entries.iter().map(|e| e.loss.unwrap()).collect();
        if self.is_final_stage() {
            let best = top_k(&losses, 1)[0];
            self.finished = true;
            return Ok(Advance::Finished {
                best: self.entries[best].id,
                loss: losses[best],
            });
        }
        let keep = self.bracket.stages[self.stage + 1].count;
        let survivors: Vec<ConfigId> = top_k(&losses, keep)
            .into_iter()
            .map(|i| self.entries[i].id)
            .collect();
        self.stage += 1;
        self.entries = survivors
            .iter()
            .map(|&id| StageEntry { id, loss: None })
            .collect();
        Ok(Advance::Promoted(survivors))
    }
}
