//! One BOHB run on counting-ones, printing each incumbent change.

use bohb::benchmarks::CountingOnes;
use bohb::scheduler::{run, OptimizerKind, RunParams};

fn main() -> bohb::Result<()> {
    let bench = CountingOnes::new(4, 4)?;
    let params = RunParams {
        optimizer: OptimizerKind::Bohb,
        n_iterations: 20,
        seed: 42,
        ..Default::default()
    };
    let trajectory = run(&bench, &params)?;

    println!(
        "{:>10} {:>6} {:>7} {:>8} {:>8}",
        "budget", "run", "fidelity", "loss", "regret"
    );
    for r in trajectory.incumbents() {
        println!(
            "{:>10} {:>6} {:>7} {:>8.3} {:>8.3}",
            r.cum_budget,
            r.sh_run,
            r.budget,
            r.loss,
            r.regret.unwrap_or(f64::NAN)
        );
    }
    println!("{} evaluations", trajectory.evaluations().count());
    Ok(())
}
