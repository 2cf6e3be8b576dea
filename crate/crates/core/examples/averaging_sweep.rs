//! Accuracy vs ERP amplitude for 1, 3 and 15 rounds of averaging.
//!
//!     cargo run --release --example averaging_sweep -- 100 0 4 6 8

use tactile_bci::config::Config;
use tactile_bci::sweep::{render_table, run_sweep, SWEEP_ROUNDS};

fn main() -> tactile_bci::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let (selections, amplitudes) = match args.split_first() {
        Some((n, rest)) if !rest.is_empty() => (*n as usize, rest.to_vec()),
        _ => (60, vec![0.0, 4.0, 6.0, 8.0]),
    };
    let cells = run_sweep(&Config::default(), &amplitudes, &SWEEP_ROUNDS, selections)?;
    print!("{}", render_table(&cells));
    Ok(())
}
