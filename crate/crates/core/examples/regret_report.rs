//! Runs small seed batches for each optimizer into a temporary directory and
//! prints the aggregated mean regret table as CSV.

use bohb::cli::{cmd_report, cmd_run, Grid, RunConfig};
use bohb::scheduler::{Axis, OptimizerKind};

fn main() -> bohb::Result<()> {
    let root = std::env::temp_dir().join(format!("bohb-report-{}", std::process::id()));
    let mut dirs = Vec::new();
    for optimizer in OptimizerKind::ALL {
        let config = RunConfig {
            optimizer,
            seeds: (0..8).collect(),
            n_iterations: 0,
            max_total_budget: Some(5e4),
            output_dir: root.join(optimizer.as_str()),
            ..Default::default()
        };
        let summary = cmd_run(&config)?;
        eprintln!("{optimizer}: {} runs", summary.written.len());
        dirs.push(config.output_dir);
    }
    let grid: Grid = "log:1000:50000:8".parse()?;
    print!("{}", cmd_report(&dirs, &grid, Axis::Budget)?.to_csv());
    std::fs::remove_dir_all(&root).ok();
    Ok(())
}
