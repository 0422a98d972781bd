//! Prints the Hyperband bracket sequence for a budget range.
//!
//! ```bash
//! cargo run --example schedule_table -- 9 729 3
//! ```

use bohb::cli::{cmd_schedule, format_schedule};

fn main() {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let (min_budget, max_budget, eta) = match args.as_slice() {
        [lo, hi, eta] => (*lo, *hi, *eta),
        [lo, hi] => (*lo, *hi, 3.0),
        _ => (9.0, 729.0, 3.0),
    };
    match cmd_schedule(min_budget, max_budget, eta) {
        Ok(brackets) => print!("{}", format_schedule(&brackets)),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    }
}
