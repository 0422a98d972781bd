//! Multi-fidelity hyperparameter optimization.
//!
//! Hyperband decides how many configurations to try at which budget, and a
//! kernel-density model (good vs. bad observations) proposes which
//! configurations to try. Runs execute over a pool of workers, either in a
//! deterministic simulation or on real threads, and produce a trajectory of
//! evaluations and incumbents.
//!
//! ```
//! use bohb::benchmarks::CountingOnes;
//! use bohb::scheduler::{run, OptimizerKind, RunParams};
//!
//! let bench = CountingOnes::with_dim(4).unwrap();
//! let params = RunParams {
//!     optimizer: OptimizerKind::Bohb,
//!     n_iterations: 5,
//!     seed: 1,
//!     ..Default::default()
//! };
//! let trajectory = run(&bench, &params).unwrap();
//! assert!(trajectory.final_regret().unwrap() < 4.0);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandit;
pub mod benchmarks;
pub mod cli;
pub mod configspace;
pub mod density;
pub mod error;
pub mod sampler;
pub mod scheduler;

pub use error::{Error, Result};
