//! Model-based proposal of new configurations.
//!
//! Observations are kept per budget. Once some budget has at least
//! `min_points + 2` observations, the largest such budget is used to fit two
//! densities: `l` over the best-performing observations and `g` over the worst.
//! Candidates are drawn from a widened copy of `l` and the one with the largest
//! `l / g` wins. A fixed fraction of proposals skips the model entirely.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::configspace::{Configuration, ConfigurationSpace, IdGen};
use crate::density::KdeModel;
use crate::error::{Error, Result};

/// Where a proposed configuration came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Random,
    Model,
}

#[derive(Debug, Clone)]
pub struct Observation {
    pub config: Configuration,
    pub budget: f64,
    /// Non-finite losses are stored as `+inf`.
    pub loss: f64,
    pub worker: Option<usize>,
    pub time: f64,
}

impl Observation {
    pub fn new(config: Configuration, budget: f64, loss: f64) -> Self {
        Self {
            config,
            budget,
            loss: sanitize_loss(loss),
            worker: None,
            time: 0.0,
        }
    }
}

/// Maps NaN and infinities to the `+inf` failure sentinel.
pub fn sanitize_loss(loss: f64) -> f64 {
    if loss.is_finite() {
        loss
    } else {
        f64::INFINITY
    }
}

/// All observations, partitioned by budget in ascending budget order.
#[derive(Debug, Clone, Default)]
pub struct ObservationStore {
    by_budget: Vec<(f64, Vec<Observation>)>,
}

impl ObservationStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, mut obs: Observation) {
        obs.loss = sanitize_loss(obs.loss);
        let idx = self
            .by_budget
            .binary_search_by(|(b, _)| b.total_cmp(&obs.budget));
        match idx {
            Ok(i) => self.by_budget[i].1.push(obs),
            Err(i) => self.by_budget.insert(i, (obs.budget, vec![obs])),
        }
    }

    /// Observations at exactly `budget`, in insertion order.
    pub fn at_budget(&self, budget: f64) -> &[Observation] {
        self.by_budget
            .iter()
            .find(|(b, _)| *b == budget)
            .map_or(&[], |(_, v)| v.as_slice())
    }

    pub fn count(&self, budget: f64) -> usize {
        self.at_budget(budget).len()
    }

    /// `(budget, count)` pairs in ascending budget order.
    pub fn counts(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.by_budget.iter().map(|(b, v)| (*b, v.len()))
    }

    pub fn len(&self) -> usize {
        self.by_budget.iter().map(|(_, v)| v.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_budget.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerParams {
    /// Fraction of proposals drawn uniformly at random.
    pub rho: f64,
    /// Fraction of observations forming the good set.
    pub top_q: f64,
    /// Candidates drawn from the widened good density.
    pub num_samples: usize,
    /// Minimum points per density; `None` means `d + 1`.
    pub min_points: Option<usize>,
    pub bandwidth_factor: f64,
    pub min_bandwidth: f64,
    /// Floor applied to `g(x)` in the acquisition ratio.
    pub eps_density: f64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        Self {
            rho: 1.0 / 3.0,
            top_q: 0.15,
            num_samples: 64,
            min_points: None,
            bandwidth_factor: 3.0,
            min_bandwidth: 1e-3,
            eps_density: 1e-32,
        }
    }
}

impl SamplerParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::invalid("rho", "must lie in [0, 1]"));
        }
        if !(self.top_q > 0.0 && self.top_q < 1.0) {
            return Err(Error::invalid("top_q", "must lie in (0, 1)"));
        }
        if self.num_samples == 0 {
            return Err(Error::invalid("num_samples", "must be positive"));
        }
        if self.min_points == Some(0) {
            return Err(Error::invalid("min_points", "must be positive"));
        }
        if !(self.bandwidth_factor >= 1.0 && self.bandwidth_factor.is_finite()) {
            return Err(Error::invalid("bandwidth_factor", "must be >= 1"));
        }
        if !(self.min_bandwidth > 0.0 && self.min_bandwidth.is_finite()) {
            return Err(Error::invalid("min_bandwidth", "must be positive"));
        }
        if !(self.eps_density > 0.0) {
            return Err(Error::invalid("eps_density", "must be positive"));
        }
        Ok(())
    }

    /// Resolved minimum number of model points for a `dim`-dimensional space.
    pub fn min_points_for(&self, dim: usize) -> usize {
        self.min_points.unwrap_or(dim + 1)
    }
}

/// Largest budget with at least `min_points + 2` observations.
pub fn select_model_budget(store: &ObservationStore, min_points: usize) -> Option<f64> {
    store
        .counts()
        .filter(|&(_, n)| n >= min_points + 2)
        .map(|(b, _)| b)
        .last()
}

/// Sizes of the good and bad sets for `n_obs` observations.
pub fn split_sizes(n_obs: usize, top_q: f64, min_points: usize) -> Result<(usize, usize)> {
    if n_obs < min_points + 2 {
        return Err(Error::Contract(format!(
            "good/bad split needs at least {} observations, got {n_obs}",
            min_points + 2
        )));
    }
    // The epsilon guards against products like 0.29 * 100 = 28.999999999999996.
    let n_good = min_points.max((top_q * n_obs as f64 + 1e-9).floor() as usize);
    let n_bad = min_points.max(n_obs.saturating_sub(n_good));
    Ok((n_good, n_bad))
}

/// Splits observations into the `n_good` lowest and `n_bad` highest losses.
/// Ties keep insertion order. The two sets overlap when there are too few
/// observations to fill both.
pub fn split_good_bad(
    observations: &[Observation],
    top_q: f64,
    min_points: usize,
) -> Result<(Vec<&Observation>, Vec<&Observation>)> {
    let (n_good, n_bad) = split_sizes(observations.len(), top_q, min_points)?;
    let mut sorted: Vec<&Observation> = observations.iter().collect();
    sorted.sort_by(|a, b| a.loss.total_cmp(&b.loss));
    let good = sorted[..n_good].to_vec();
    let bad = sorted[sorted.len() - n_bad..].to_vec();
    Ok((good, bad))
}

/// Model state behind a model-based proposal, exposed for inspection.
#[derive(Debug, Clone)]
pub struct ModelTrace {
    pub budget: f64,
    pub good: KdeModel,
    pub bad: KdeModel,
    /// All candidates drawn from the widened good density, in draw order.
    pub candidates: Vec<Vec<f64>>,
    /// Index of the winning candidate.
    pub chosen: usize,
}

#[derive(Debug, Clone)]
pub struct Proposal {
    pub config: Configuration,
    pub provenance: Provenance,
    pub trace: Option<ModelTrace>,
}

/// Fits the good and bad densities on the largest qualifying budget.
pub fn fit_densities(
    store: &ObservationStore,
    params: &SamplerParams,
    space: &ConfigurationSpace,
) -> Result<Option<(f64, KdeModel, KdeModel)>> {
    let min_points = params.min_points_for(space.dim());
    let Some(budget) = select_model_budget(store, min_points) else {
        return Ok(None);
    };
    let (good, bad) = split_good_bad(store.at_budget(budget), params.top_q, min_points)?;
    let good_rows: Vec<&[f64]> = good.iter().map(|o| o.config.unit()).collect();
    let bad_rows: Vec<&[f64]> = bad.iter().map(|o| o.config.unit()).collect();
    let good = KdeModel::fit(space, &good_rows, params.min_bandwidth)?;
    let bad = KdeModel::fit(space, &bad_rows, params.min_bandwidth)?;
    Ok(Some((budget, good, bad)))
}

/// Acquisition value `l(x) / max(g(x), eps)`.
pub fn acquisition(good: &KdeModel, bad: &KdeModel, x: &[f64], eps_density: f64) -> f64 {
    good.pdf(x) / bad.pdf(x).max(eps_density)
}

/// Proposes the next configuration to evaluate.
///
/// With `rho >= 1` no random number is consumed for the coin flip, so a
/// proposal stream is identical to plain uniform sampling.
pub fn propose<R: Rng + ?Sized>(
    store: &ObservationStore,
    params: &SamplerParams,
    space: &ConfigurationSpace,
    rng: &mut R,
    ids: &IdGen,
) -> Proposal {
    let random = |rng: &mut R| Proposal {
        config: space.sample_uniform(rng, ids),
        provenance: Provenance::Random,
        trace: None,
    };
    if params.rho >= 1.0 || rng.random::<f64>() < params.rho {
        return random(rng);
    }
    let Ok(Some((budget, good, bad))) = fit_densities(store, params, space) else {
        return random(rng);
    };

    let candidates: Vec<Vec<f64>> = (0..params.num_samples)
        .map(|_| good.sample(params.bandwidth_factor, rng))
        .collect();
    let mut chosen = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, x) in candidates.iter().enumerate() {
        let score = acquisition(&good, &bad, x, params.eps_density);
        if score.partial_cmp(&best) == Some(Ordering::Greater) {
            best = score;
            chosen = i;
        }
    }
    let config = Configuration::from_unit_unchecked(ids.next_id(), candidates[chosen].clone());
    Proposal {
        config,
        provenance: Provenance::Model,
        trace: Some(ModelTrace {
            budget,
            good,
            bad,
            candidates,
            chosen,
        }),
    }
}
