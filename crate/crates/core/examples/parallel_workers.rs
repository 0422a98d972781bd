//! Simulated parallel workers: BOHB on counting-ones with 1, 2, 4 and 8
//! workers, compared by the simulated time at which the mean regret over
//! seeds first drops to a threshold.

use bohb::benchmarks::CountingOnes;
use bohb::scheduler::{mean_first_reaching, run, Axis, RunParams, Trajectory};

fn main() -> bohb::Result<()> {
    let bench = CountingOnes::new(4, 4)?;
    let threshold = 0.5;
    let mut serial = None;
    println!("workers  time to mean regret <= {threshold}  speedup");
    for n_workers in [1, 2, 4, 8] {
        let runs = (0..32)
            .map(|seed| {
                let params = RunParams {
                    n_workers,
                    n_iterations: 0,
                    max_total_budget: Some(3e4),
                    seed,
                    ..Default::default()
                };
                run(&bench, &params)
            })
            .collect::<bohb::Result<Vec<Trajectory>>>()?;
        match mean_first_reaching(&runs, Axis::Time, threshold) {
            Some(t) => {
                let base = *serial.get_or_insert(t);
                println!("{n_workers:>7}  {t:>26}  {:>7.1}", base / t);
            }
            None => println!("{n_workers:>7}  {:>26}", "not reached"),
        }
    }
    Ok(())
}
