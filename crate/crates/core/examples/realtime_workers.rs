//! Real worker threads. Each evaluation sleeps in proportion to its budget,
//! so the trajectory's clock is wall time.

use bohb::benchmarks::CountingOnes;
use bohb::scheduler::{run, ClockMode, RunParams};

fn main() -> bohb::Result<()> {
    let bench = CountingOnes::with_dim(4)?;
    let params = RunParams {
        n_workers: 4,
        n_iterations: 5,
        clock: ClockMode::Realtime,
        // 729 budget units take about 7 ms.
        time_scale: 1e-5,
        seed: 3,
        ..Default::default()
    };
    let trajectory = run(&bench, &params)?;
    let last = trajectory.records().last().expect("non-empty run");
    println!(
        "{} evaluations in {:.3} s wall time, final regret {:?}",
        trajectory.evaluations().count(),
        last.sim_time,
        trajectory.final_regret()
    );
    Ok(())
}
