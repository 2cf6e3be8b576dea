//! With no evoked response the decoder should sit at chance.

use tactile_bci::config::Config;
use tactile_bci::decoder::{self, random_intents};
use tactile_bci::eval::{binomial_acceptance_region, binomial_tail, CHANCE_LEVEL};
use tactile_bci::paradigm::SessionMode;

fn main() -> tactile_bci::Result<()> {
    let cfg = Config {
        erp_amplitude: 0.0,
        ..Config::default()
    };
    let (_, model) = decoder::run_calibration(&cfg.simulation(SessionMode::Calibration, 0))?;

    let n = 600;
    let results = decoder::run_online(
        &cfg.simulation(SessionMode::Online, n),
        &model,
        &random_intents(n, 1),
    )?;
    let correct = results.iter().filter(|r| r.is_correct()).count() as u64;
    let (lo, hi) = binomial_acceptance_region(n as u64, CHANCE_LEVEL, 0.99)?;
    println!(
        "{correct}/{n} correct ({:.1}%)",
        100.0 * correct as f64 / n as f64
    );
    println!("99% chance region: [{lo}, {hi}]");
    println!(
        "P(X >= {correct}) = {:.3}",
        binomial_tail(correct, n as u64, CHANCE_LEVEL)?
    );
    Ok(())
}
