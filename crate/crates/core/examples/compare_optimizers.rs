//! BOHB, Hyperband and random search on counting-ones, averaged over seeds.
//!
//! ```bash
//! cargo run --release --example compare_optimizers -- 16
//! ```

use std::time::Instant;

use bohb::benchmarks::CountingOnes;
use bohb::scheduler::{run, Axis, OptimizerKind, RunParams};

fn main() {
    let seeds: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(8);
    let total_budget = 5e5;
    let bench = CountingOnes::new(4, 4).unwrap();
    let checkpoints = [0.05, 0.25, 0.5, 1.0].map(|f| f * total_budget);

    println!(
        "optimizer       {:>10} {:>10} {:>10} {:>10}   secs",
        "5%", "25%", "50%", "100%"
    );
    for optimizer in OptimizerKind::ALL {
        let started = Instant::now();
        let mut sums = [0.0; 4];
        for seed in 0..seeds {
            let params = RunParams {
                optimizer,
                n_iterations: 0,
                max_total_budget: Some(total_budget),
                seed,
                ..Default::default()
            };
            let traj = run(&bench, &params).unwrap();
            for (sum, t) in sums.iter_mut().zip(checkpoints) {
                *sum += traj.regret_at(Axis::Budget, t).unwrap_or(8.0);
            }
        }
        let means = sums.map(|s| s / seeds as f64);
        println!(
            "{:<15} {:>10.4} {:>10.4} {:>10.4} {:>10.4}   {:.1}",
            optimizer.as_str(),
            means[0],
            means[1],
            means[2],
            means[3],
            started.elapsed().as_secs_f64()
        );
    }
}
