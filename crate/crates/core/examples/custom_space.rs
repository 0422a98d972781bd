//! Loads a configuration space from TOML and optimizes the multi-fidelity
//! sphere on it, printing the best configuration in original units.

use bohb::benchmarks::{Benchmark, MfSphere};
use bohb::configspace::ConfigurationSpace;
use bohb::sampler::sanitize_loss;
use bohb::scheduler::{eval_rng, Action};
use bohb::scheduler::{Coordinator, RunParams};

fn main() -> bohb::Result<()> {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/data/sphere_space.toml"
    );
    let space = ConfigurationSpace::from_path(path)?;
    let bench = MfSphere::with_space(space)?;
    let (min_budget, max_budget) = bench.budget_range();
    let mut params = RunParams {
        n_iterations: 8,
        seed: 11,
        ..Default::default()
    };
    params.hyperband.min_budget = min_budget;
    params.hyperband.max_budget = max_budget;

    // Drive the coordinator directly with a single synchronous worker.
    let mut coord = Coordinator::new(&bench, params.clone())?;
    let mut now = 0.0;
    while let Action::Dispatch(job) = coord.next_action(now) {
        let mut rng = eval_rng(params.seed, job.id);
        let loss = sanitize_loss(bench.evaluate(&job.config, job.budget, &mut rng)?);
        now += bench.cost(&job.config, job.budget);
        coord.on_result(job.id, loss, now, Some(0))?;
    }

    let (config, budget, loss) = coord.incumbent().expect("at least one evaluation");
    println!("incumbent at budget {budget}: loss {loss:.4}");
    for (name, value) in bench.space().describe(config)? {
        println!("  {name} = {value:?}");
    }
    println!("regret {:.4}", bench.regret(config).unwrap());
    Ok(())
}
