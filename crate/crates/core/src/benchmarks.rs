//! Multi-fidelity objectives with exact-value oracles.

use rand::RngCore;
use rand_distr::{Binomial, Distribution, Normal};

use crate::configspace::{Configuration, ConfigurationSpace, DimKind, ParameterSpec};
use crate::error::{Error, Result};

/// A multi-fidelity objective. Lower losses are better.
///
/// Implementations must be safe for concurrent evaluation: all randomness
/// comes from the per-call `rng`.
pub trait Benchmark: Send + Sync {
    fn name(&self) -> &str;

    fn space(&self) -> &ConfigurationSpace;

    /// `(min_budget, max_budget)` the benchmark is meant to run with.
    fn budget_range(&self) -> (f64, f64);

    /// Noisy loss of `config` at `budget`.
    fn evaluate(&self, config: &Configuration, budget: f64, rng: &mut dyn RngCore) -> Result<f64>;

    /// Noise-free value of the true objective, when known.
    fn exact(&self, _config: &Configuration) -> Option<f64> {
        None
    }

    /// Global optimum of the true objective, when known.
    fn optimum(&self) -> Option<f64> {
        None
    }

    /// Simulated seconds an evaluation takes.
    fn cost(&self, _config: &Configuration, budget: f64) -> f64 {
        budget
    }

    /// Immediate regret `|f(x) - f(x*)|`.
    fn regret(&self, config: &Configuration) -> Option<f64> {
        Some((self.exact(config)? - self.optimum()?).abs())
    }
}

/// The counting-ones problem: binary categorical dimensions plus continuous
/// dimensions whose value is the success probability of a Bernoulli variable.
/// The budget is the number of Bernoulli draws per continuous dimension.
#[derive(Debug, Clone)]
pub struct CountingOnes {
    n_cat: usize,
    n_cont: usize,
    space: ConfigurationSpace,
    budgets: (f64, f64),
}

impl CountingOnes {
    pub fn new(n_cat: usize, n_cont: usize) -> Result<Self> {
        let params: Vec<_> = (0..n_cat)
            .map(|i| ParameterSpec::categorical(format!("cat_{i}"), ["0", "1"]))
            .chain((0..n_cont).map(|j| ParameterSpec::continuous(format!("cont_{j}"), 0.0, 1.0)))
            .collect();
        Ok(Self {
            n_cat,
            n_cont,
            space: ConfigurationSpace::new(params)?,
            budgets: (9.0, 729.0),
        })
    }

    /// `d/2` categorical and `d - d/2` continuous dimensions.
    pub fn with_dim(d: usize) -> Result<Self> {
        Self::new(d / 2, d - d / 2)
    }

    pub fn with_budgets(mut self, min_budget: f64, max_budget: f64) -> Self {
        self.budgets = (min_budget, max_budget);
        self
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_cat, self.n_cont)
    }

    /// `-(sum of categorical values + sum of continuous values)` on unit coordinates.
    pub fn exact_unit(&self, unit: &[f64]) -> f64 {
        -unit.iter().sum::<f64>()
    }
}

impl Benchmark for CountingOnes {
    fn name(&self) -> &str {
        "counting-ones"
    }

    fn space(&self) -> &ConfigurationSpace {
        &self.space
    }

    fn budget_range(&self) -> (f64, f64) {
        self.budgets
    }

    fn evaluate(&self, config: &Configuration, budget: f64, rng: &mut dyn RngCore) -> Result<f64> {
        let draws = budget.round().max(1.0) as u64;
        let unit = config.unit();
        let mut total: f64 = unit[..self.n_cat].iter().sum();
        for &p in &unit[self.n_cat..] {
            let successes = Binomial::new(draws, p)
                .map_err(|e| Error::Evaluation(e.to_string()))?
                .sample(rng);
            total += successes as f64 / draws as f64;
        }
        Ok(-total)
    }

    fn exact(&self, config: &Configuration) -> Option<f64> {
        Some(self.exact_unit(config.unit()))
    }

    fn optimum(&self) -> Option<f64> {
        Some(-((self.n_cat + self.n_cont) as f64))
    }
}

/// Smooth continuous test function with a budget-dependent bias and noise.
///
/// `sum (x - 0.7)^2 + (1 - b/b_max) * sum 0.1 sin(20 x) + N(0, (0.01 sqrt(b_max/b))^2)`
/// on unit coordinates. The bias vanishes at `b_max`.
#[derive(Debug, Clone)]
pub struct MfSphere {
    space: ConfigurationSpace,
    budgets: (f64, f64),
}

impl MfSphere {
    pub fn new(dim: usize) -> Result<Self> {
        let params = (0..dim)
            .map(|j| ParameterSpec::continuous(format!("x_{j}"), 0.0, 1.0))
            .collect();
        Self::with_space(ConfigurationSpace::new(params)?)
    }

    /// Uses a caller-supplied space; every parameter must be non-categorical.
    pub fn with_space(space: ConfigurationSpace) -> Result<Self> {
        if space.dim_kinds().iter().any(|k| *k != DimKind::Continuous) {
            return Err(Error::InvalidSpace(
                "mf-sphere needs continuous or integer parameters only".into(),
            ));
        }
        Ok(Self {
            space,
            budgets: (1.0, 81.0),
        })
    }

    pub fn with_budgets(mut self, min_budget: f64, max_budget: f64) -> Self {
        self.budgets = (min_budget, max_budget);
        self
    }

    fn bias(&self, unit: &[f64], budget: f64) -> f64 {
        (1.0 - budget / self.budgets.1) * unit.iter().map(|x| 0.1 * (20.0 * x).sin()).sum::<f64>()
    }

    fn noise_sd(&self, budget: f64) -> f64 {
        0.01 * (self.budgets.1 / budget).sqrt()
    }
}

fn sphere(unit: &[f64]) -> f64 {
    unit.iter().map(|x| (x - 0.7).powi(2)).sum()
}

impl Benchmark for MfSphere {
    fn name(&self) -> &str {
        "mf-sphere"
    }

    fn space(&self) -> &ConfigurationSpace {
        &self.space
    }

    fn budget_range(&self) -> (f64, f64) {
        self.budgets
    }

    fn evaluate(&self, config: &Configuration, budget: f64, rng: &mut dyn RngCore) -> Result<f64> {
        if !(budget > 0.0) {
            return Err(Error::Evaluation(format!(
                "budget {budget} must be positive"
            )));
        }
        let unit = config.unit();
        let noise = Normal::new(0.0, self.noise_sd(budget))
            .map_err(|e| Error::Evaluation(e.to_string()))?
            .sample(rng);
        Ok(sphere(unit) + self.bias(unit, budget) + noise)
    }

    fn exact(&self, config: &Configuration) -> Option<f64> {
        Some(sphere(config.unit()))
    }

    fn optimum(&self) -> Option<f64> {
        Some(0.0)
    }
}
